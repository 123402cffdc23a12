#pragma once

#include <sstream>

#include "soergel/projector.hpp"

namespace soergel {

struct CheckResult {
  std::string name;
  bool pass = true;
  std::string detail;
};

// Bundled engines over one scalar field; the unit the CLI and the acceptance
// suite hand around.
template <ScalarField K>
struct Engine {
  std::shared_ptr<Group> group;
  HeckeAlgebra hecke;
  Calculus<K> calculus;
  LeafEngine<K> leaves;
  ProjectorEngine<K> projectors;

  explicit Engine(std::shared_ptr<Group> g, bool reversed_selection = false)
      : group(std::move(g)), hecke(group), calculus(group), leaves(calculus, hecke),
        projectors(leaves, reversed_selection) {}
  explicit Engine(const CoxeterDatum& d)
      : Engine(std::make_shared<Group>(d)) {}
};

// All reduced words of length <= max_len (ordered by length, then lex).
std::vector<Word> reduced_words_up_to(Group& g, int max_len);
// All words (reduced or not) of length <= max_len.
std::vector<Word> all_words_up_to(int rank, int max_len);

// Degree certificate: the degree multiset of the double leaves equals the
// Hecke-side graded rank for every pair of the given words.
template <ScalarField K>
CheckResult check_degree_certificate(Engine<K>& e, const std::vector<Word>& words) {
  CheckResult r{"degree-certificate", true, ""};
  int pairs = 0;
  for (const Word& s : words)
    for (const Word& w : words) {
      LaurentInt got = e.leaves.double_leaf_degrees(s, w);
      LaurentInt want = e.hecke.dlb_degree_oracle(s, w);
      ++pairs;
      if (got != want) {
        r.pass = false;
        r.detail = "mismatch at (" + word_str(s) + ", " + word_str(w) + ")";
        return r;
      }
    }
  r.detail = std::to_string(pairs) + " pairs";
  return r;
}

// Unitriangularity of the pairing-evaluation matrix of the double leaves in
// the key order: unit diagonal, zeros strictly below.
template <ScalarField K>
CheckResult check_unitriangularity(Engine<K>& e, const std::vector<Word>& words) {
  CheckResult r{"unitriangularity", true, ""};
  int pairs = 0;
  for (const Word& s : words)
    for (const Word& w : words) {
      auto table = e.leaves.dl_table(s, w);
      ++pairs;
      for (size_t a = 0; a < table->dls.size(); ++a) {
        if (!(table->evals[a][LeafEngine<K>::test_slot(table->keys[a])] ==
              Poly<K>::one(e.calculus.nvars()))) {
          r.pass = false;
          r.detail = "diagonal not 1 at (" + word_str(s) + ", " + word_str(w) + ")";
          return r;
        }
        for (size_t b = 0; b < a; ++b)
          if (!table->evals[a][LeafEngine<K>::test_slot(table->keys[b])].is_zero()) {
            r.pass = false;
            r.detail = "nonzero below the diagonal at (" + word_str(s) + ", " + word_str(w) + ")";
            return r;
          }
      }
    }
  r.detail = std::to_string(pairs) + " pairs";
  return r;
}

// For fixed j-bits, distinct i-bits reach distinct targets.
template <ScalarField K>
CheckResult check_lemma_distinct_targets(Engine<K>& e, const std::vector<Word>& words) {
  CheckResult r{"distinct-targets-per-j", true, ""};
  for (const Word& w : words) {
    auto sk = e.leaves.skeletons(w);
    std::map<std::pair<Bits, uint32_t>, Bits> seen;
    for (const LeafSkeleton& l : *sk) {
      auto key = std::make_pair(l.jbits, l.target);
      auto [it, fresh] = seen.try_emplace(key, l.ibits);
      if (!fresh && it->second != l.ibits) {
        r.pass = false;
        r.detail = "two i-paths share j and target at word " + word_str(w);
        return r;
      }
    }
  }
  r.detail = std::to_string(words.size()) + " words";
  return r;
}

// Projector suite: idempotency, orthogonality, lambda.eta = Id, absorption,
// and character = KL element, for every element of the region.
template <ScalarField K>
CheckResult check_projector_suite(Engine<K>& e, const std::vector<Element>& region) {
  CheckResult r{"projector-suite", true, ""};
  auto& C = e.calculus;
  for (Element x : region) {
    Word w = e.group->canonical_word(x);
    auto proj = e.projectors.favorite(w);
    if (!(C.compose(proj->mor, proj->mor) == proj->mor) ||
        !(C.compose(proj->mor, proj->big_p) == proj->mor) ||
        !(C.compose(proj->big_p, proj->mor) == proj->mor)) {
      r.pass = false;
      r.detail = "projector identities fail at " + word_str(w);
      return r;
    }
    for (const auto& blk : proj->blocks) {
      if (!(blk.lambda * blk.eta == Matrix<K>::identity(blk.lambda.rows()))) {
        r.pass = false;
        r.detail = "lambda.eta != Id at " + word_str(w);
        return r;
      }
      auto family = e.projectors.zblock_projectors(*proj, blk);
      for (size_t i = 0; i < family.size(); ++i)
        for (size_t j = 0; j < family.size(); ++j) {
          Morphism<K> prod = C.compose(family[i], family[j]);
          bool ok = (i == j) ? (prod == family[i]) : prod.is_zero();
          if (!ok || !C.compose(proj->mor, family[i]).is_zero()) {
            r.pass = false;
            r.detail = "orthogonality fails at " + word_str(w);
            return r;
          }
        }
    }
    if (!(e.leaves.character(proj->mor) == e.hecke.kl_element(x))) {
      r.pass = false;
      r.detail = "character != KL element at " + word_str(w);
      return r;
    }
  }
  r.detail = std::to_string(region.size()) + " elements";
  return r;
}

// The simplified lambda' formula agrees with the full formula on every
// applicable (x, z); counts how many blocks were applicable.
template <ScalarField K>
CheckResult check_strategy_crosscheck(Engine<K>& e, const std::vector<Element>& region) {
  CheckResult r{"lambda-strategy-crosscheck", true, ""};
  int applicable = 0, blocks = 0;
  for (Element x : region) {
    auto proj = e.projectors.favorite(e.group->canonical_word(x));
    for (const auto& blk : proj->blocks) {
      ++blocks;
      if (!blk.simplified_applicable) continue;
      ++applicable;
      if (!blk.lambda_simple || !(*blk.lambda_simple == blk.lambda)) {
        r.pass = false;
        r.detail = "simplified formula disagrees at " + word_str(proj->word);
        return r;
      }
    }
  }
  r.detail = std::to_string(applicable) + "/" + std::to_string(blocks) + " blocks applicable";
  return r;
}

// KL recursion vs the independent bar-invariance solver on a region.
inline CheckResult check_kl_oracle(HeckeAlgebra& H, const std::vector<Element>& region) {
  CheckResult r{"kl-oracle", true, ""};
  for (Element x : region)
    if (!(H.kl_element(x) == H.kl_element_by_solver(x))) {
      r.pass = false;
      r.detail = "solver disagrees at " + word_str(x.shortlex_word());
      return r;
    }
  r.detail = std::to_string(region.size()) + " elements";
  return r;
}

// Mod-p suite: every favorite projector on the region is p-integral, the
// reduction is idempotent over F_p and keeps the char-0 character.
CheckResult check_modp_suite(Engine<Rational>& e0, const std::string& type, long p,
                             const std::vector<Element>& region);

// Realization validation over K on a region.
template <ScalarField K>
CheckResult check_realization(Engine<K>& e, const std::vector<Element>& region) {
  CheckResult r{"realization", true, ""};
  auto rep = validate_realization<K>(*e.group, region);
  if (!rep.pass) {
    r.pass = false;
    r.detail = rep.issues.empty() ? "failed" : rep.issues[0].what;
  } else {
    r.detail = std::to_string(region.size()) + " elements";
  }
  return r;
}

}  // namespace soergel
