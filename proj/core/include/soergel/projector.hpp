#pragma once

#include <atomic>
#include <future>
#include <set>
#include <thread>
#include <variant>

#include "soergel/leaves.hpp"

namespace soergel {

// Provenance of one z-summand removed from Im(P): the surviving degree-zero
// leaves, the greedy-selected family, the intersection matrix and its
// inverse.
template <ScalarField K>
struct ZBlock {
  Element z;
  Word zword;
  long long mult = 0;
  std::vector<Bits> candidates;  // L_z (i-bits, canonical order)
  std::vector<Bits> selected;    // L_z^oplus (i-bits, selection order)
  Matrix<K> lambda, eta;
  K det;
  bool simplified_applicable = false;
  std::optional<Matrix<K>> lambda_simple;
  bool integral_over_z_half = true;
};

// The favorite projector of a reduced word, with provenance; the DLB
// coefficient vector is attached on demand.
template <ScalarField K>
struct Projector {
  Word word;
  Element target;
  Morphism<K> mor;
  Morphism<K> big_p;  // P = p_{s'} (x) id
  std::vector<ZBlock<K>> blocks;
  std::optional<std::vector<Poly<K>>> dlb;  // left coefficients, dl_table order
};

struct NotLiftable {
  long p = 0;
  std::vector<std::string> offenders;  // offending coefficient polynomials
};

struct BadPrimeEntry {
  std::string x, z;
  std::string det;           // |det lambda_z| with 2-denominators cleared
  std::vector<long> primes;  // odd prime divisors
};

struct BadPrimeReport {
  std::string datum;
  std::string region_top;
  std::vector<BadPrimeEntry> entries;
  std::vector<long> D;
  std::vector<std::string> palindrome_fallbacks;
  std::vector<std::string> integrality_violations;
  bool two_excluded = true;  // p = 2 is outside scope (half-Demazure denominators)
};

// Odd prime divisors of |n| by trial division (desk-scale values).
inline std::vector<long> odd_prime_divisors(mpz_class n) {
  std::vector<long> out;
  if (n < 0) n = -n;
  while (n != 0 && mpz_even_p(n.get_mpz_t())) n /= 2;
  for (mpz_class p = 3; n > 1 && p * p <= n; p += 2)
    if (mpz_divisible_p(n.get_mpz_t(), p.get_mpz_t())) {
      out.push_back(p.get_si());
      while (mpz_divisible_p(n.get_mpz_t(), p.get_mpz_t())) n /= p;
    }
  if (n > 1) {
    if (!n.fits_slong_p()) throw TheoryError("prime divisor does not fit a machine word");
    out.push_back(n.get_si());
  }
  return out;
}

// Integer string of |q| after clearing the 2-power denominator; second
// component is false when q is not in Z[1/2].
inline std::pair<std::string, bool> clear_two_denominator(const Rational& q) {
  if (q.denominator_is_power_of_two()) {
    mpz_class n = q.numerator();
    if (n < 0) n = -n;
    return {n.get_str(), true};
  }
  return {q.str(), false};
}

template <ScalarField K>
class ProjectorEngine {
 public:
  explicit ProjectorEngine(LeafEngine<K>& leaves, bool reversed_selection = false)
      : L_(leaves), reversed_(reversed_selection) {}

  LeafEngine<K>& leaves() { return L_; }
  Group* group() const { return L_.group(); }

  // The favorite projector of a reduced word; memoized with a
  // compute-or-wait contract so parallel sweeps share work (recursion is by
  // word length, so waiting cannot cycle).
  std::shared_ptr<const Projector<K>> favorite(const Word& s, bool want_dlb = false) {
    {
      std::unique_lock lock(mtx_);
      auto it = cache_.find(s);
      if (it != cache_.end()) {
        auto fut = it->second;
        lock.unlock();
        auto got = fut.get();
        if (!want_dlb || got->dlb) return got;
        // fall through to attach coefficients (recompute path below)
      } else {
        std::promise<std::shared_ptr<const Projector<K>>> pr;
        cache_.emplace(s, pr.get_future().share());
        lock.unlock();
        try {
          auto value = compute(s, want_dlb);
          pr.set_value(value);
          return value;
        } catch (...) {
          pr.set_exception(std::current_exception());
          std::lock_guard relock(mtx_);
          cache_.erase(s);
          throw;
        }
      }
    }
    // Attach the DLB coefficients to a cached projector lacking them.
    auto fresh = compute(s, true);
    std::lock_guard lock(mtx_);
    std::promise<std::shared_ptr<const Projector<K>>> pr;
    pr.set_value(fresh);
    cache_.insert_or_assign(s, pr.get_future().share());
    return fresh;
  }

  // Degree-zero leaves with target z whose composite p_z o l does not vanish
  // on Im P (tested as p_z o l o P != 0); canonical order.
  struct LzData {
    std::vector<Bits> bits;
    std::vector<Leaf<K>> leaf;
  };
  LzData degree_zero_leaves_to(const Word& s, Element z, const Morphism<K>& P,
                               const Morphism<K>& pz) {
    LzData out;
    auto sk = L_.skeletons(s);
    for (const LeafSkeleton& k : *sk) {
      if (k.degree != 0 || k.target != z.id()) continue;
      Leaf<K> leaf = L_.materialize(s, k.ibits);
      Morphism<K> pl = L_.calculus().compose(pz, leaf.mor);
      if (L_.calculus().compose(pl, P).is_zero()) continue;
      out.bits.push_back(k.ibits);
      out.leaf.push_back(std::move(leaf));
    }
    return out;
  }

  // Greedy selection of L_z^oplus: admit a leaf when the evaluation of
  // P o l^a o p_z at the minimum-degree element of B_z is linearly
  // independent from the previously admitted evaluations over K.
  std::vector<size_t> select_L_oplus(const Word& s, const LzData& lz, const Morphism<K>& P,
                                     const Morphism<K>& pz, long long mult) {
    Calculus<K>& C = L_.calculus();
    std::vector<size_t> order(lz.bits.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (reversed_) std::reverse(order.begin(), order.end());
    std::vector<std::vector<K>> rows;
    std::vector<size_t> chosen;
    for (size_t i : order) {
      if (static_cast<long long>(chosen.size()) == mult) break;
      BSElement<K> unit = BSElement<K>::unit_tensor(pz.src(), C.nvars());
      BSElement<K> v = P.apply(C.adjoint(lz.leaf[i].mor).apply(pz.apply(unit)));
      std::vector<K> coords = flatten(v, s);
      if (append_if_independent(rows, coords)) chosen.push_back(i);
    }
    if (static_cast<long long>(chosen.size()) < mult)
      throw TheoryError("select_L_oplus: fewer than m_z independent leaves (theory violation)");
    return chosen;
  }

  // lambda_z entry: the scalar with p_z l_j P l_i^a p_z = lambda p_z,
  // extracted at the minimum-degree element and verified as an exact
  // morphism identity.
  K lambda_entry(const Morphism<K>& P, const Morphism<K>& pz, const Leaf<K>& li,
                 const Leaf<K>& lj) {
    Calculus<K>& C = L_.calculus();
    Morphism<K> comp =
        C.compose(pz, C.compose(lj.mor, C.compose(P, C.compose(C.adjoint(li.mor), pz))));
    K val = comp.image(0).coeff(0).constant_term();
    if (!(comp == pz.scaled(val)))
      throw TheoryError("lambda entry: composite is not a scalar multiple of p_z");
    return val;
  }

  // The intersection scalar of two degree-zero leaves with common source and
  // target: the action of l o l'^a on the minimal-degree line of the target.
  K intersection_scalar(const Leaf<K>& l, const Leaf<K>& lp) {
    Calculus<K>& C = L_.calculus();
    if (l.degree != 0 || lp.degree != 0 || l.src != lp.src || !(l.target == lp.target))
      throw TheoryError("intersection_scalar: leaves not degree-0 with equal source/target");
    BSElement<K> unit = BSElement<K>::unit_tensor(l.target_word, C.nvars());
    BSElement<K> v = l.mor.apply(C.adjoint(lp.mor).apply(unit));
    return v.coeff(0).constant_term();
  }

  // Matrix of intersection scalars over the selected family of a z-block.
  Matrix<K> intersection_matrix(const Word& xword, const ZBlock<K>& b) {
    size_t m = b.selected.size();
    std::vector<Leaf<K>> ls;
    for (Bits bits : b.selected) ls.push_back(L_.materialize(xword, bits));
    Matrix<K> mat(static_cast<int>(m), static_cast<int>(m));
    for (size_t i = 0; i < m; ++i)
      for (size_t j = 0; j < m; ++j)
        mat.at(static_cast<int>(i), static_cast<int>(j)) = intersection_scalar(ls[j], ls[i]);
    return mat;
  }

  // Determinant d(x,y) over L_y^oplus from the favorite-projector run on the
  // canonical word of x; unit when y is not a degree-zero summand.
  K d_determinant(Element x, Element y) {
    if (!group()->bruhat_leq(y, x)) throw TheoryError("d_determinant requires y <= x");
    Word xw = group()->canonical_word(x);
    if (x == y) return K::from_int(1);
    auto proj = favorite(xw);
    for (const ZBlock<K>& b : proj->blocks)
      if (b.z == y) return intersection_matrix(xw, b).det();
    return K::from_int(1);
  }

  // Rebuilds the rank-one projector family of a z-block (used by the
  // orthogonality checks of the verification suite).
  std::vector<Morphism<K>> zblock_projectors(const Projector<K>& proj, const ZBlock<K>& b) {
    Calculus<K>& C = L_.calculus();
    Morphism<K> pz = favorite(b.zword)->mor;
    std::vector<Leaf<K>> ls;
    for (Bits bits : b.selected) ls.push_back(L_.materialize(proj.word, bits));
    size_t m = ls.size();
    std::vector<Morphism<K>> out;
    for (size_t i = 0; i < m; ++i) {
      std::optional<Morphism<K>> acc;
      for (size_t j = 0; j < m; ++j) {
        const K& c = b.eta.at(static_cast<int>(i), static_cast<int>(j));
        Morphism<K> e = C.compose(
            proj.big_p,
            C.compose(C.adjoint(ls[i].mor),
                      C.compose(pz, C.compose(ls[j].mor, proj.big_p))));
        Morphism<K> term = e.scaled(c);
        acc = acc ? *acc + term : term;
      }
      out.push_back(std::move(*acc));
    }
    return out;
  }

  // Per-element sweep over a Bruhat-closed region; parallel over elements,
  // deterministic output.
  BadPrimeReport bad_primes(const std::vector<Element>& region, int jobs,
                            bool crosscheck_reversed = true);

  std::vector<std::string> integrality_violations() {
    std::lock_guard lock(flags_mtx_);
    return integrality_violations_;
  }

 private:
  std::shared_ptr<Projector<K>> compute(const Word& s, bool want_dlb);

  // Fixed coordinate layout for an element of B_s homogeneous of one degree:
  // for each basis index the coefficients over the full monomial list of the
  // forced degree.
  std::vector<K> flatten(const BSElement<K>& v, const Word& s) {
    auto d = v.degree();
    int deg = d ? *d : 0;
    std::vector<K> out;
    int n = static_cast<int>(s.size());
    for (Bits e = 0; e < (Bits(1) << n); ++e) {
      int cdeg = deg - bs_degree(n, e);
      if (cdeg < 0) continue;
      Poly<K> c = v.coeff(e);
      for (const Monomial& mo : detail::monomials_of_degree(L_.calculus().nvars(), cdeg))
        out.push_back(c.coeff(mo));
    }
    return out;
  }

  // Incremental Gaussian elimination: keeps `rows` in echelon form, returns
  // true (and absorbs the candidate) when it enlarges the span.
  bool append_if_independent(std::vector<std::vector<K>>& rows, std::vector<K> cand) {
    for (const auto& r : rows) {
      size_t lead = 0;
      while (lead < r.size() && r[lead].is_zero()) ++lead;
      if (lead == r.size()) continue;
      if (!cand[lead].is_zero()) {
        K f = cand[lead] / r[lead];
        for (size_t i = lead; i < cand.size(); ++i) cand[i] = cand[i] - f * r[i];
      }
    }
    for (const K& v : cand)
      if (!v.is_zero()) {
        rows.push_back(std::move(cand));
        return true;
      }
    return false;
  }

  bool simplification_applicable(const Word& s, Element x, int last, Element z) {
    HeckeAlgebra& H = L_.hecke();
    Group* g = group();
    HeckeElt ker_class = H.kl_word_product(s) -
                         H.mul(H.kl_element(x), H.kl_element(g->generator(last)));
    auto expansion = H.kl_expand(ker_class);
    Element xs = x.times(last);
    for (auto& [y, c] : expansion) {
      if ((y == z || y == xs) && c.coeff(0) != 0) return false;
    }
    return true;
  }

  void note_integrality(const std::string& what) {
    std::lock_guard lock(flags_mtx_);
    integrality_violations_.push_back(what);
  }

  LeafEngine<K>& L_;
  bool reversed_;
  std::mutex mtx_;
  std::map<Word, std::shared_future<std::shared_ptr<const Projector<K>>>> cache_;
  std::mutex flags_mtx_;
  std::vector<std::string> integrality_violations_;
};

// --- construction ------------------------------------------------------------

template <ScalarField K>
std::shared_ptr<Projector<K>> ProjectorEngine<K>::compute(const Word& s, bool want_dlb) {
  Calculus<K>& C = L_.calculus();
  HeckeAlgebra& H = L_.hecke();
  Group* g = group();
  auto out = std::make_shared<Projector<K>>();
  out->word = s;
  out->target = g->element_of(s);
  if (static_cast<int>(s.size()) != out->target.length())
    throw TheoryError("favorite projector requires a reduced word");
  if (s.empty()) {
    out->mor = C.identity(s);
    out->big_p = out->mor;
    if (want_dlb) out->dlb = L_.expand_in_dlb(out->mor);
    return out;
  }
  Word prefix(s.begin(), s.end() - 1);
  int last = s.back();
  auto pref = favorite(prefix);
  Morphism<K> P = C.tensor3({}, pref->mor, {last});
  Element x = g->element_of(prefix);
  auto mults = H.kl_multiplicities(x, last);
  Morphism<K> result = P;
  for (auto& [z, mult] : mults) {
    ZBlock<K> blk;
    blk.z = z;
    blk.zword = g->canonical_word(z);
    blk.mult = mult;
    Morphism<K> pz = favorite(blk.zword)->mor;
    // minimum-degree element goes to itself under p_z
    if (!(pz.apply(BSElement<K>::unit_tensor(blk.zword, C.nvars())) ==
          BSElement<K>::unit_tensor(blk.zword, C.nvars())))
      throw TheoryError("p_z does not fix the minimum-degree element");
    LzData lz = degree_zero_leaves_to(s, z, P, pz);
    blk.candidates = lz.bits;
    if (static_cast<long long>(lz.bits.size()) < mult)
      throw TheoryError("fewer degree-zero leaves than the KL multiplicity");
    std::vector<size_t> sel = select_L_oplus(s, lz, P, pz, mult);
    for (size_t i : sel) blk.selected.push_back(lz.bits[i]);
    // lambda matrix
    size_t m = sel.size();
    blk.lambda = Matrix<K>(static_cast<int>(m), static_cast<int>(m));
    for (size_t i = 0; i < m; ++i)
      for (size_t j = 0; j < m; ++j)
        blk.lambda.at(static_cast<int>(i), static_cast<int>(j)) =
            lambda_entry(P, pz, lz.leaf[sel[i]], lz.leaf[sel[j]]);
    if constexpr (std::is_same_v<K, Rational>) {
      for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j)
          if (!blk.lambda.at(static_cast<int>(i), static_cast<int>(j))
                   .denominator_is_power_of_two()) {
            blk.integral_over_z_half = false;
            note_integrality("lambda entry not in Z[1/2] at x=" + word_str(s) +
                             " z=" + word_str(blk.zword));
          }
    }
    // the simplified formula, where the kernel of P has no relevant summand
    blk.simplified_applicable = simplification_applicable(s, x, last, z);
    if (blk.simplified_applicable) {
      Matrix<K> simple(static_cast<int>(m), static_cast<int>(m));
      for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j)
          simple.at(static_cast<int>(i), static_cast<int>(j)) =
              intersection_scalar(lz.leaf[sel[j]], lz.leaf[sel[i]]);
      if (!(simple == blk.lambda))
        throw TheoryError("simplified lambda formula disagrees with the full formula at x=" +
                          word_str(s) + " z=" + word_str(blk.zword));
      blk.lambda_simple = std::move(simple);
    }
    auto eta = blk.lambda.inverse();
    if (!eta)
      throw TheoryError("singular lambda matrix at x=" + word_str(s) +
                        " z=" + word_str(blk.zword));
    blk.eta = std::move(*eta);
    blk.det = blk.lambda.det();
    // p_z^i = sum_j eta_ij P l_i^a p_z l_j P, orthogonal family
    std::vector<Morphism<K>> family;
    for (size_t i = 0; i < m; ++i) {
      std::optional<Morphism<K>> acc;
      for (size_t j = 0; j < m; ++j) {
        Morphism<K> e = C.compose(
            P, C.compose(C.adjoint(lz.leaf[sel[i]].mor),
                         C.compose(pz, C.compose(lz.leaf[sel[j]].mor, P))));
        Morphism<K> term = e.scaled(blk.eta.at(static_cast<int>(i), static_cast<int>(j)));
        acc = acc ? *acc + term : term;
      }
      family.push_back(std::move(*acc));
    }
    for (size_t i = 0; i < m; ++i)
      for (size_t j = 0; j < m; ++j) {
        Morphism<K> prod = C.compose(family[i], family[j]);
        Morphism<K> expect = (i == j) ? family[i] : family[i].scaled(K());
        if (!(prod == expect))
          throw TheoryError("p_z^i family is not orthogonal at x=" + word_str(s));
      }
    for (auto& f : family) result = result - f;
    out->blocks.push_back(std::move(blk));
  }
  // defining identities of the favorite projector
  if (!(C.compose(result, result) == result))
    throw TheoryError("favorite projector is not idempotent at " + word_str(s));
  if (!(C.compose(result, P) == result) || !(C.compose(P, result) == result))
    throw TheoryError("favorite projector does not factor through P at " + word_str(s));
  out->mor = std::move(result);
  out->big_p = std::move(P);
  if (want_dlb) out->dlb = L_.expand_in_dlb(out->mor);
  return out;
}

template <ScalarField K>
BadPrimeReport ProjectorEngine<K>::bad_primes(const std::vector<Element>& region, int jobs,
                                              bool crosscheck_reversed) {
  Group* g = group();
  // region must be Bruhat-closed
  for (Element x : region)
    for (Element y : g->bruhat_ideal(x))
      if (std::find(region.begin(), region.end(), y) == region.end())
        throw TheoryError("bad_primes: region not closed under the Bruhat order");
  // parallel sweep, shortest words first so dependencies are usually warm
  std::vector<Word> words;
  for (Element x : region) words.push_back(g->canonical_word(x));
  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mtx;
  auto worker = [&] {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= words.size()) break;
      try {
        favorite(words[i]);
      } catch (...) {
        std::lock_guard lock(err_mtx);
        if (!first_error) first_error = std::current_exception();
        break;
      }
    }
  };
  int nthreads = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  BadPrimeReport rep;
  rep.datum = g->datum().label();
  rep.region_top = word_str(words.empty() ? Word{} : words.back());
  std::set<long> dset;
  for (const Word& w : words) {
    auto proj = favorite(w);
    for (const ZBlock<K>& b : proj->blocks) {
      BadPrimeEntry e;
      e.x = word_str(w);
      e.z = word_str(b.zword);
      if constexpr (std::is_same_v<K, Rational>) {
        auto [ds, ok] = clear_two_denominator(b.det);
        e.det = ds;
        if (ok) {
          for (long p : odd_prime_divisors(mpz_class(ds))) {
            e.primes.push_back(p);
            dset.insert(p);
          }
        } else {
          note_integrality("determinant not in Z[1/2] at x=" + e.x + " z=" + e.z);
        }
      } else {
        e.det = b.det.str();
      }
      rep.entries.push_back(std::move(e));
    }
  }
  rep.D.assign(dset.begin(), dset.end());
  for (Element x : region)
    if (g->palindrome_fallback(x)) rep.palindrome_fallbacks.push_back(word_str(g->canonical_word(x)));
  rep.integrality_violations = integrality_violations();
  if (crosscheck_reversed) {
    ProjectorEngine<K> other(L_, !reversed_);
    BadPrimeReport alt = other.bad_primes(region, jobs, false);
    if (alt.D != rep.D)
      throw TheoryError("bad-prime set is not invariant under reversing the greedy order");
  }
  return rep;
}

// Characteristic-p reduction of a char-0 favorite projector: reduce the DLB
// coefficients mod p when they are p-integral, rebuild the morphism over
// F_p, and check idempotency; the caller compares characters.
template <class EngineFp>
std::variant<Projector<Fp>, NotLiftable> reduce_mod_p(const Projector<Rational>& p0, long p,
                                                      EngineFp& fp_leaves) {
  if (p == 2 || Fp::modulus() != p)
    throw TheoryError("reduce_mod_p: odd prime with matching F_p modulus required");
  if (!p0.dlb) throw TheoryError("reduce_mod_p: projector lacks its DLB coefficient vector");
  NotLiftable bad{p, {}};
  std::vector<Poly<Fp>> coeffs;
  auto table0 = fp_leaves.dl_table(p0.word, p0.word);
  if (table0->dls.size() != p0.dlb->size())
    throw TheoryError("reduce_mod_p: double-leaf bases differ between characteristics");
  for (size_t i = 0; i < p0.dlb->size(); ++i) {
    const Poly<Rational>& c = (*p0.dlb)[i];
    Poly<Fp> cp(fp_leaves.calculus().nvars());
    bool ok = true;
    for (auto& [mono, v] : c.terms()) {
      auto r = reduce_mod(v, p);
      if (!r) {
        ok = false;
        break;
      }
      Poly<Fp> term = Poly<Fp>::constant(fp_leaves.calculus().nvars(), *r);
      for (size_t vi = 0; vi < mono.size(); ++vi)
        for (int e = 0; e < mono[vi]; ++e)
          term = term * Poly<Fp>::var(fp_leaves.calculus().nvars(), static_cast<int>(vi));
      cp += term;
    }
    if (!ok) bad.offenders.push_back(c.str());
    coeffs.push_back(std::move(cp));
  }
  if (!bad.offenders.empty()) return bad;
  Projector<Fp> out;
  out.word = p0.word;
  out.target = fp_leaves.group()->element_of(p0.word);
  int n = static_cast<int>(p0.word.size());
  Morphism<Fp> acc(p0.word, p0.word, 0,
                   std::vector<BSElement<Fp>>(size_t(1) << n, BSElement<Fp>(p0.word)));
  for (size_t i = 0; i < table0->dls.size(); ++i) {
    if (coeffs[i].is_zero()) continue;
    acc = acc + table0->dls[i].mor.scaled_poly(coeffs[i], -table0->dls[i].degree);
  }
  auto& C = fp_leaves.calculus();
  if (!(C.compose(acc, acc) == acc))
    throw TheoryError("reduce_mod_p: reduction is not idempotent (theory violation)");
  out.mor = std::move(acc);
  out.big_p = C.identity(p0.word);
  out.dlb = std::move(coeffs);
  return out;
}

}  // namespace soergel
