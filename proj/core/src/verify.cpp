#include "soergel/verify.hpp"

namespace soergel {

std::vector<Word> reduced_words_up_to(Group& g, int max_len) {
  std::vector<Word> out{{}};
  std::vector<Word> layer{{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<Word> next;
    for (const Word& w : layer)
      for (int s = 0; s < g.rank(); ++s) {
        Word e = w;
        e.push_back(s);
        if (g.element_of(e).length() == len) next.push_back(std::move(e));
      }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
    if (layer.empty()) break;
  }
  return out;
}

std::vector<Word> all_words_up_to(int rank, int max_len) {
  std::vector<Word> out{{}};
  size_t begin = 0;
  for (int len = 1; len <= max_len; ++len) {
    size_t end = out.size();
    for (size_t i = begin; i < end; ++i)
      for (int s = 0; s < rank; ++s) {
        Word e = out[i];
        e.push_back(s);
        out.push_back(std::move(e));
      }
    begin = end;
  }
  return out;
}

CheckResult check_modp_suite(Engine<Rational>& e0, const std::string& type, long p,
                             const std::vector<Element>& region) {
  CheckResult r{"modp-suite(p=" + std::to_string(p) + ")", true, ""};
  Fp::ModulusScope scope(p);
  Engine<Fp> ep(CoxeterDatum::named(type));
  for (Element x : region) {
    Word w = e0.group->canonical_word(x);
    auto p0 = e0.projectors.favorite(w, /*want_dlb=*/true);
    auto res = reduce_mod_p(*p0, p, ep.leaves);
    if (std::holds_alternative<NotLiftable>(res)) {
      r.pass = false;
      r.detail = "not p-integral at " + word_str(w);
      return r;
    }
    auto& pp = std::get<Projector<Fp>>(res);
    if (!(ep.calculus.compose(pp.mor, pp.mor) == pp.mor)) {
      r.pass = false;
      r.detail = "reduction not idempotent at " + word_str(w);
      return r;
    }
    HeckeElt char_p = ep.leaves.character(pp.mor);
    HeckeElt char_0 = e0.hecke.kl_element(x);
    // characters live over different Group instances; compare coefficientwise
    bool same = char_p.terms().size() == char_0.terms().size();
    if (same)
      for (auto& [id0, c0] : char_0.terms()) {
        Element y0(e0.group.get(), id0);
        Element yp = ep.group->element_of(e0.group->canonical_word(y0));
        if (!(char_p.coeff(yp) == c0)) {
          same = false;
          break;
        }
      }
    if (!same) {
      r.pass = false;
      r.detail = "character changed under reduction at " + word_str(w);
      return r;
    }
  }
  r.detail = std::to_string(region.size()) + " elements";
  return r;
}

}  // namespace soergel
