#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <mutex>

#include "soergel/bimod.hpp"

namespace soergel {

// Path data of one leaf of the tree T_s: i-bits flag the steps that apply a
// multiplication morphism, j-bits the steps that apply a j; (s, i) determines
// the leaf completely.
struct LeafSkeleton {
  Bits ibits = 0, jbits = 0;
  uint32_t target = 0;
  int degree = 0;
};

template <ScalarField K>
struct Leaf {
  Word src;
  Bits ibits = 0, jbits = 0;
  Element target;
  Word target_word;  // the fixed canonical word of the target
  int degree = 0;
  Morphism<K> mor;  // B_src -> B_{target_word}
};

// Double leaf: upper leaf from s, lower leaf from r, equal targets; the
// morphism is lower^adjoint o upper.  The ordering key is the pair
// (lower i-bits, upper j-bits).
template <ScalarField K>
struct DoubleLeaf {
  Leaf<K> upper, lower;
  Morphism<K> mor;  // B_s -> B_r
  int degree = 0;
};

struct DlKey {
  Bits lower_i = 0;  // length = |r|
  Bits upper_j = 0;  // length = |s|
  int p = 0, n = 0;
};

// Total order on double-leaf keys: lexicographic on the upper j-bits, then
// descending sum of the lower i-bits, then lexicographic on the lower
// i-bits.  This is the order in which the evaluation matrix of the double
// leaves is lower-unitriangular (checked exhaustively by the test corpus;
// the evaluation elements pair with the complemented i-bits, see
// pairing_test_index).
inline bool dl_key_less(const DlKey& a, const DlKey& b) {
  if (a.upper_j != b.upper_j) return bits_lex_less(a.upper_j, b.upper_j, a.n);
  int sa = std::popcount(a.lower_i), sb = std::popcount(b.lower_i);
  if (sa != sb) return sa > sb;
  if (a.lower_i != b.lower_i) return bits_lex_less(a.lower_i, b.lower_i, a.p);
  return false;
}

inline bool dl_key_eq(const DlKey& a, const DlKey& b) {
  return a.lower_i == b.lower_i && a.upper_j == b.upper_j;
}

// Index of the evaluation element x^{j'} (x) x^{op}_{b'} attached to a key:
// the j side uses the key's j-bits, the op side the complement of the i-bits
// (the surviving slot selectors of the lower leaf).
inline std::pair<Bits, Bits> pairing_test_index(const DlKey& k) {
  return {k.upper_j, ~k.lower_i & ((Bits(1) << k.p) - 1)};
}

// Evaluations of the adjunction image of a morphism B_s -> B_r at all test
// elements x^{j'} (x) x^{op}_{b'}; indexed by (j' << p) | b'.
template <ScalarField K>
using PairingVector = std::vector<Poly<K>>;

// Light/double leaves machinery on top of the calculus.  Caches (leaf sets,
// double-leaf tables, test normal forms) allow concurrent reads with
// serialized writes.
template <ScalarField K>
class LeafEngine {
 public:
  LeafEngine(Calculus<K>& calc, HeckeAlgebra& hecke) : C_(calc), H_(hecke) {}

  Calculus<K>& calculus() { return C_; }
  HeckeAlgebra& hecke() { return H_; }
  Group* group() const { return C_.group(); }

  // Path data of all 2^n leaves, in canonical enumeration order (binary
  // counter on the i-bits, i_1 most significant).
  std::shared_ptr<const std::vector<LeafSkeleton>> skeletons(const Word& s) {
    {
      std::lock_guard lock(mtx_);
      auto it = skel_cache_.find(s);
      if (it != skel_cache_.end()) return it->second;
    }
    auto out = std::make_shared<std::vector<LeafSkeleton>>();
    walk_skeletons(s, *out);
    std::lock_guard lock(mtx_);
    skel_cache_.emplace(s, out);
    return skel_cache_.at(s);
  }

  // All 2^n leaves with morphisms, canonical order.
  std::shared_ptr<const std::vector<Leaf<K>>> light_leaves(const Word& s) {
    {
      std::lock_guard lock(mtx_);
      auto it = leaf_cache_.find(s);
      if (it != leaf_cache_.end()) return it->second;
    }
    auto out = std::make_shared<std::vector<Leaf<K>>>();
    out->reserve(size_t(1) << s.size());
    walk_leaves(s, [&](Leaf<K>&& l) { out->push_back(std::move(l)); }, std::nullopt);
    std::lock_guard lock(mtx_);
    leaf_cache_.emplace(s, out);
    return leaf_cache_.at(s);
  }

  // Single leaf with the given i-bits (selective materialization).
  Leaf<K> materialize(const Word& s, Bits ibits) {
    std::optional<Leaf<K>> found;
    walk_leaves(s, [&](Leaf<K>&& l) { found = std::move(l); }, ibits);
    if (!found) throw TheoryError("materialize: no leaf with the requested bits");
    return std::move(*found);
  }

  // All double leaves of Hom(B_s, B_r), sorted ascending by the key order;
  // the degree multiset is checked against the Hecke-side oracle.
  std::vector<DoubleLeaf<K>> double_leaves(const Word& s, const Word& r) {
    auto up = light_leaves(s);
    auto lo = light_leaves(r);
    std::vector<DoubleLeaf<K>> out;
    for (const Leaf<K>& lu : *up)
      for (const Leaf<K>& ll : *lo) {
        if (lu.target != ll.target) continue;
        DoubleLeaf<K> d;
        d.upper = lu;
        d.lower = ll;
        d.mor = C_.compose(C_.adjoint(ll.mor), lu.mor);
        d.degree = lu.degree + ll.degree;
        out.push_back(std::move(d));
      }
    std::sort(out.begin(), out.end(), [&](const DoubleLeaf<K>& a, const DoubleLeaf<K>& b) {
      return dl_key_less(key_of(a, s, r), key_of(b, s, r));
    });
    check_degree_certificate(s, r, out);
    return out;
  }

  static DlKey key_of(const DoubleLeaf<K>& d, const Word& s, const Word& r) {
    return DlKey{d.lower.ibits, d.upper.jbits, static_cast<int>(r.size()),
                 static_cast<int>(s.size())};
  }

  // Degree multisets of double leaves per the skeletons only (cheap route
  // used by the acceptance degree certificate).
  LaurentInt double_leaf_degrees(const Word& s, const Word& r) {
    auto up = skeletons(s);
    auto lo = skeletons(r);
    LaurentInt count;
    for (const LeafSkeleton& a : *up)
      for (const LeafSkeleton& b : *lo)
        if (a.target == b.target) count += LaurentInt::monomial(a.degree + b.degree);
    return count;
  }

  void check_degree_certificate(const Word& s, const Word& r,
                                const std::vector<DoubleLeaf<K>>& dls) {
    LaurentInt got;
    for (const DoubleLeaf<K>& d : dls) got += LaurentInt::monomial(d.degree);
    if (got != H_.dlb_degree_oracle(s, r))
      throw TheoryError("double leaves degree multiset disagrees with the Hecke oracle");
  }

  // --- the evaluation pairing ----------------------------------------------

  // Normal forms of all test elements x^{j'} (x) x^{op}_{b'} of B_{s r^op},
  // shared across expansions for the same word pair.
  struct TestTable {
    Word combined;
    std::vector<BSElement<K>> elems;  // indexed by (j' << p) | b'
  };

  std::shared_ptr<const TestTable> test_table(const Word& s, const Word& r) {
    auto kk = std::make_pair(s, r);
    {
      std::lock_guard lock(mtx_);
      auto it = test_cache_.find(kk);
      if (it != test_cache_.end()) return it->second;
    }
    int n = static_cast<int>(s.size()), p = static_cast<int>(r.size());
    auto tt = std::make_shared<TestTable>();
    tt->combined = s;
    for (auto it = r.rbegin(); it != r.rend(); ++it) tt->combined.push_back(*it);
    tt->elems.reserve(size_t(1) << (n + p));
    for (Bits idx = 0; idx < (Bits(1) << (n + p)); ++idx) {
      Bits b = idx & ((Bits(1) << p) - 1);
      Bits j = idx >> p;
      std::vector<Poly<K>> slots(static_cast<size_t>(n + p) + 1, C_.poly_one());
      for (int k = 1; k <= n; ++k)
        if ((j >> (k - 1)) & 1) slots[k - 1] = C_.poly_var(s[k - 1]);
      for (int m = 1; m <= p; ++m) {
        int bit = p - m;  // slot n+m-1 pairs with junction letter r_{p+1-m}
        if ((b >> bit) & 1) slots[n + m - 1] = C_.poly_var(r[bit]);
      }
      tt->elems.push_back(C_.normal_form(tt->combined, std::move(slots)));
    }
    std::lock_guard lock(mtx_);
    test_cache_.emplace(kk, tt);
    return test_cache_.at(kk);
  }

  // Converts f : B_s -> B_r to Hom(B_s B_{r^op}, R) through the adjunction
  // caps and evaluates at every test element.
  PairingVector<K> pairing_eval(const Morphism<K>& f) {
    const Word& s = f.src();
    const Word& r = f.dst();
    int n = static_cast<int>(s.size()), p = static_cast<int>(r.size());
    auto capM = C_.cap(r);
    auto tests = test_table(s, r);
    // images of cap o (f (x) id) on the combined basis
    std::vector<Poly<K>> fhat(size_t(1) << (n + p), Poly<K>(C_.nvars()));
    for (Bits g = 0; g < (Bits(1) << (n + p)); ++g) {
      Bits gs = g & ((Bits(1) << n) - 1);
      Bits gr = g >> n;
      Poly<K> acc(C_.nvars());
      for (auto& [h, c] : f.image(gs).coeffs())
        acc += c * capM->image(h | (gr << p)).coeff(0);
      fhat[g] = std::move(acc);
    }
    PairingVector<K> out(size_t(1) << (n + p), Poly<K>(C_.nvars()));
    for (Bits idx = 0; idx < (Bits(1) << (n + p)); ++idx) {
      Poly<K> v(C_.nvars());
      for (auto& [g, c] : tests->elems[idx].coeffs()) v += c * fhat[g];
      out[idx] = std::move(v);
    }
    return out;
  }

  // Precomputed double-leaf basis with pairing vectors, for expansions.
  struct DlTable {
    std::vector<DoubleLeaf<K>> dls;
    std::vector<DlKey> keys;
    std::vector<PairingVector<K>> evals;
  };

  std::shared_ptr<const DlTable> dl_table(const Word& s, const Word& r) {
    auto kk = std::make_pair(s, r);
    {
      std::lock_guard lock(mtx_);
      auto it = dl_cache_.find(kk);
      if (it != dl_cache_.end()) return it->second;
    }
    auto t = std::make_shared<DlTable>();
    t->dls = double_leaves(s, r);
    for (const DoubleLeaf<K>& d : t->dls) t->keys.push_back(key_of(d, s, r));
    for (const DoubleLeaf<K>& d : t->dls) t->evals.push_back(pairing_eval(d.mor));
    std::lock_guard lock(mtx_);
    dl_cache_.emplace(kk, t);
    return dl_cache_.at(kk);
  }

  static size_t test_slot(const DlKey& k) {
    auto [j, b] = pairing_test_index(k);
    return (static_cast<size_t>(j) << k.p) | b;
  }

  // Unique left coefficients c with f = sum c_d * d, by forward substitution
  // in the key order against the unitriangular evaluation data.  The
  // combination is re-verified on every basis element of the source.
  std::vector<Poly<K>> expand_in_dlb(const Morphism<K>& f) {
    auto table = dl_table(f.src(), f.dst());
    return expand_against(f, *table);
  }

  std::vector<Poly<K>> expand_against(const Morphism<K>& f, const DlTable& table) {
    PairingVector<K> fe = pairing_eval(f);
    size_t m = table.dls.size();
    std::vector<Poly<K>> coeff(m, Poly<K>(C_.nvars()));
    for (size_t a = 0; a < m; ++a) {
      size_t slot = test_slot(table.keys[a]);
      // unit diagonal
      if (!(table.evals[a][slot] == Poly<K>::one(C_.nvars())))
        throw TheoryError("double-leaf evaluation matrix: diagonal entry is not 1");
      Poly<K> v = fe[slot];
      for (size_t b = 0; b < a; ++b) {
        if (dl_key_eq(table.keys[b], table.keys[a]))
          throw TheoryError("double-leaf keys are not distinct");
        v -= coeff[b] * table.evals[b][slot];
      }
      coeff[a] = std::move(v);
    }
    // verification: the combination reproduces f exactly
    int n = static_cast<int>(f.src().size());
    for (Bits e = 0; e < (Bits(1) << n); ++e) {
      BSElement<K> acc(f.dst());
      for (size_t a = 0; a < m; ++a) acc += table.dls[a].mor.image(e).scaled(coeff[a]);
      if (acc != f.image(e))
        throw TheoryError("DLB back-substitution left a nonzero residual");
    }
    return coeff;
  }

  // --- leaves basis of Hom(B_s, R_x) ---------------------------------------

  // {beta o l : l leaf of s with target x}, a right R-module basis, sorted
  // ascending by the lexicographic order on j-bits (each leaf to a fixed
  // target has distinct j-bits).  Evaluation elements x^{j} are attached.
  struct RxBasis {
    Element x;
    Word xword;
    std::vector<Bits> ibits, jbits;
    std::vector<int> degrees;
    std::vector<RxMorphism<K>> mors;
    std::vector<BSElement<K>> tests;           // normal form of x^{j_k}
    std::vector<std::vector<Poly<K>>> evals;   // evals[k'][k] = mors[k'](tests[k])
  };

  std::shared_ptr<const RxBasis> rx_basis(const Word& s, Element x) {
    auto kk = std::make_pair(s, x.id());
    {
      std::lock_guard lock(mtx_);
      auto it = rx_cache_.find(kk);
      if (it != rx_cache_.end()) return it->second;
    }
    auto leaves = light_leaves(s);
    auto b = std::make_shared<RxBasis>();
    b->x = x;
    b->xword = group()->canonical_word(x);
    RxMorphism<K> bx = C_.beta(b->xword);
    std::vector<size_t> order;
    for (size_t i = 0; i < leaves->size(); ++i)
      if ((*leaves)[i].target == x) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t c) {
      return bits_lex_less((*leaves)[a].jbits, (*leaves)[c].jbits, static_cast<int>(s.size()));
    });
    int n = static_cast<int>(s.size());
    for (size_t i : order) {
      const Leaf<K>& l = (*leaves)[i];
      b->ibits.push_back(l.ibits);
      b->jbits.push_back(l.jbits);
      b->degrees.push_back(l.degree);
      b->mors.push_back(C_.compose_rx(bx, l.mor));
      std::vector<Poly<K>> slots(static_cast<size_t>(n) + 1, C_.poly_one());
      for (int k = 1; k <= n; ++k)
        if ((l.jbits >> (k - 1)) & 1) slots[k - 1] = C_.poly_var(s[k - 1]);
      b->tests.push_back(C_.normal_form(s, std::move(slots)));
    }
    for (size_t a = 0; a < b->mors.size(); ++a) {
      b->evals.emplace_back();
      for (size_t c = 0; c < b->tests.size(); ++c)
        b->evals[a].push_back(b->mors[a].apply(b->tests[c]));
    }
    // triangularity of the leaves basis: unit diagonal, zero below
    for (size_t a = 0; a < b->mors.size(); ++a) {
      if (!(b->evals[a][a] == Poly<K>::one(C_.nvars())))
        throw TheoryError("leaves basis: diagonal evaluation is not 1");
      for (size_t c = 0; c < a; ++c)
        if (!b->evals[a][c].is_zero())
          throw TheoryError("leaves basis: evaluation matrix is not triangular");
    }
    std::lock_guard lock(mtx_);
    rx_cache_.emplace(kk, b);
    return rx_cache_.at(kk);
  }

  // Expansion f = sum_k (beta o l_k) . r_k in the right-module leaves basis;
  // returns the left values c_k = x(r_k) (the twisted coefficients), after
  // verifying the combination reproduces f on every basis element.
  std::vector<Poly<K>> expand_rx(const RxMorphism<K>& f, const RxBasis& b) {
    size_t m = b.mors.size();
    std::vector<Poly<K>> c(m, Poly<K>(C_.nvars()));
    for (size_t k = 0; k < m; ++k) {
      Poly<K> v = f.apply(b.tests[k]);
      for (size_t k2 = 0; k2 < k; ++k2) v -= c[k2] * b.evals[k2][k];
      c[k] = std::move(v);
    }
    for (size_t e = 0; e < f.images.size(); ++e) {
      Poly<K> acc(C_.nvars());
      for (size_t k = 0; k < m; ++k) acc += b.mors[k].images[e] * c[k];
      if (!(acc == f.images[e]))
        throw TheoryError("leaves-basis expansion left a nonzero residual");
    }
    return c;
  }

  // Decategorification: the class of Im(p) in the Hecke algebra via graded
  // ranks of Hom(Im p, R_x) in the leaves basis.  p must be idempotent.
  HeckeElt character(const Morphism<K>& p) {
    if (p.src() != p.dst() || p.degree() != 0) throw TheoryError("character: p not an endomorphism of degree 0");
    if (!(C_.compose(p, p) == p)) throw TheoryError("character: p is not idempotent");
    const Word& s = p.src();
    Group* g = group();
    HeckeElt out(g);
    auto skel = skeletons(s);
    std::vector<uint32_t> targets;
    for (const LeafSkeleton& l : *skel) targets.push_back(l.target);
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    for (uint32_t xid : targets) {
      Element x(g, xid);
      auto b = rx_basis(s, x);
      size_t m = b->mors.size();
      // matrix of f -> f o p in the leaves basis (twisted left values)
      std::vector<std::vector<Poly<K>>> A(m);
      for (size_t j = 0; j < m; ++j) A[j] = expand_rx(C_.compose_rx(b->mors[j], p), *b);
      // A[j][k]: coefficient of basis k in image of basis j; per-degree rank
      // of the constant-term specialization
      std::map<int, std::vector<size_t>> by_deg;
      for (size_t k = 0; k < m; ++k) by_deg[b->degrees[k]].push_back(k);
      LaurentInt rk;
      long long total_rank = 0;
      for (auto& [d, idx] : by_deg) {
        Matrix<K> blk(static_cast<int>(idx.size()), static_cast<int>(idx.size()));
        for (size_t a = 0; a < idx.size(); ++a)
          for (size_t c = 0; c < idx.size(); ++c)
            blk.at(static_cast<int>(c), static_cast<int>(a)) = A[idx[a]][idx[c]].constant_term();
        int r = blk.rank();
        total_rank += r;
        if (r) rk += LaurentInt::monomial(d, r);
      }
      // cross-degree constant terms must vanish
      for (size_t j = 0; j < m; ++j)
        for (size_t k = 0; k < m; ++k)
          if (b->degrees[j] != b->degrees[k] && !A[j][k].constant_term().is_zero())
            throw TheoryError("character: reduced matrix is not degree-diagonal");
      // rank stability under evaluation of the R_+ variables at a fixed probe
      std::vector<K> probe;
      for (int i = 0; i < C_.nvars(); ++i) probe.push_back(K::from_int(i + 2));
      Matrix<K> full(static_cast<int>(m), static_cast<int>(m));
      for (size_t j = 0; j < m; ++j)
        for (size_t k = 0; k < m; ++k)
          full.at(static_cast<int>(k), static_cast<int>(j)) = A[j][k].eval(probe);
      if (full.rank() != total_rank)
        throw TheoryError("character: rank not stable under specialization");
      if (!rk.is_zero()) out.add(xid, rk);
    }
    return out;
  }

  // p-composed double leaves:每 upper leaf post-composed with the favorite
  // projector of its target word (supplied by the provider); same degrees,
  // still a basis (the unitriangular evaluation data is rebuilt and checked).
  using ProjectorProvider = std::function<Morphism<K>(const Word&)>;

  DlTable p_double_leaves(const Word& s, const Word& r, const ProjectorProvider& provider) {
    auto up = light_leaves(s);
    auto lo = light_leaves(r);
    DlTable t;
    for (const Leaf<K>& lu : *up)
      for (const Leaf<K>& ll : *lo) {
        if (lu.target != ll.target) continue;
        DoubleLeaf<K> d;
        d.upper = lu;
        d.lower = ll;
        Morphism<K> pl = C_.compose(provider(lu.target_word), lu.mor);
        d.mor = C_.compose(C_.adjoint(ll.mor), pl);
        d.degree = lu.degree + ll.degree;
        t.dls.push_back(std::move(d));
      }
    std::sort(t.dls.begin(), t.dls.end(), [&](const DoubleLeaf<K>& a, const DoubleLeaf<K>& b) {
      return dl_key_less(key_of(a, s, r), key_of(b, s, r));
    });
    check_degree_certificate(s, r, t.dls);
    for (const DoubleLeaf<K>& d : t.dls) t.keys.push_back(key_of(d, s, r));
    for (const DoubleLeaf<K>& d : t.dls) t.evals.push_back(pairing_eval(d.mor));
    // basis property: the unit diagonal must survive the p-composition
    for (size_t a = 0; a < t.dls.size(); ++a)
      if (!(t.evals[a][test_slot(t.keys[a])] == Poly<K>::one(C_.nvars())))
        throw TheoryError("p-double leaves: diagonal evaluation is not 1");
    return t;
  }

 private:
  struct WalkState {
    Word prefix;
    Element y;
    Morphism<K> mor;
    Bits ibits = 0, jbits = 0;
  };

  template <class Emit>
  void walk_leaves(const Word& s, Emit&& emit, std::optional<Bits> only) {
    Group* g = group();
    WalkState st{Word{}, g->identity(), C_.identity(s), 0, 0};
    rec_leaves(s, 0, st, emit, only);
  }

  // Braid move layer applied inside prefix `current` framed by `frame_rest`
  // on the right: id (x) f_{ab} (x) id over the word current + frame_rest.
  Morphism<K> move_layer(const Word& current, const BraidMove& mv, const Word& frame_rest) {
    Word left(current.begin(), current.begin() + mv.pos);
    Word right(current.begin() + mv.pos + mv.m, current.end());
    right.insert(right.end(), frame_rest.begin(), frame_rest.end());
    return C_.tensor3(left, C_.braid_morphism(mv.s, mv.r), right);
  }

  template <class Emit>
  void rec_leaves(const Word& s, int k, WalkState& st, Emit&& emit, std::optional<Bits> only) {
    Group* g = group();
    int n = static_cast<int>(s.size());
    if (k == n) {
      Leaf<K> leaf;
      leaf.src = s;
      leaf.ibits = st.ibits;
      leaf.jbits = st.jbits;
      leaf.target = st.y;
      leaf.target_word = g->canonical_word(st.y);
      Morphism<K> m = st.mor;
      Word w = st.prefix;
      for (const BraidMove& mv : g->path_to_canonical(st.prefix)) {
        m = C_.compose(move_layer(w, mv, {}), m);
        w = apply_braid_move(w, mv);
      }
      if (m.dst() != leaf.target_word || w != leaf.target_word)
        throw TheoryError("leaf does not end at the canonical word");
      leaf.degree = m.degree();
      if (leaf.degree != std::popcount(leaf.ibits) - std::popcount(leaf.jbits))
        throw TheoryError("leaf degree differs from #m - #j");
      leaf.mor = std::move(m);
      emit(std::move(leaf));
      return;
    }
    int c = s[k];
    Word rest(s.begin() + k + 1, s.end());
    Element yc = st.y.times(c);
    bool up = yc.length() > st.y.length();
    if (up) {
      // children: id (i_k = 0) then m (i_k = 1)
      if (!only || (((*only >> k) & 1) == 0)) {
        WalkState child{st.prefix, yc, st.mor, st.ibits, st.jbits};
        child.prefix.push_back(c);
        rec_leaves(s, k + 1, child, emit, only);
      }
      if (!only || (((*only >> k) & 1) == 1)) {
        WalkState child{st.prefix, st.y,
                        C_.compose(C_.tensor3(st.prefix, C_.gen_m(c), rest), st.mor),
                        st.ibits | (Bits(1) << k), st.jbits};
        rec_leaves(s, k + 1, child, emit, only);
      }
    } else {
      // braid the prefix to end with c, then contract with j
      Word t = st.prefix;
      Morphism<K> m = st.mor;
      Word frame_rest = rest;
      frame_rest.insert(frame_rest.begin(), c);
      for (const BraidMove& mv : g->braid_path(t, c)) {
        m = C_.compose(move_layer(t, mv, frame_rest), m);
        t = apply_braid_move(t, mv);
      }
      Word head(t.begin(), t.end() - 1);
      m = C_.compose(C_.tensor3(head, C_.gen_j(c), rest), m);
      if (!only || (((*only >> k) & 1) == 0)) {
        WalkState child{t, st.y, m, st.ibits, st.jbits | (Bits(1) << k)};
        rec_leaves(s, k + 1, child, emit, only);
      }
      if (!only || (((*only >> k) & 1) == 1)) {
        WalkState child{head, yc, C_.compose(C_.tensor3(head, C_.gen_m(c), rest), m),
                        st.ibits | (Bits(1) << k), st.jbits | (Bits(1) << k)};
        rec_leaves(s, k + 1, child, emit, only);
      }
    }
  }

  void walk_skeletons(const Word& s, std::vector<LeafSkeleton>& out);

  Calculus<K>& C_;
  HeckeAlgebra& H_;
  std::mutex mtx_;
  std::map<Word, std::shared_ptr<const std::vector<LeafSkeleton>>> skel_cache_;
  std::map<Word, std::shared_ptr<const std::vector<Leaf<K>>>> leaf_cache_;
  std::map<std::pair<Word, Word>, std::shared_ptr<const TestTable>> test_cache_;
  std::map<std::pair<Word, Word>, std::shared_ptr<const DlTable>> dl_cache_;
  std::map<std::pair<Word, uint32_t>, std::shared_ptr<const RxBasis>> rx_cache_;
};

template <ScalarField K>
void LeafEngine<K>::walk_skeletons(const Word& s, std::vector<LeafSkeleton>& out) {
  int n = static_cast<int>(s.size());
  out.reserve(size_t(1) << n);
  std::function<void(int, Element, Bits, Bits)> rec = [&](int k, Element y, Bits ib, Bits jb) {
    if (k == n) {
      out.push_back({ib, jb, y.id(), std::popcount(ib) - std::popcount(jb)});
      return;
    }
    Element yc = y.times(s[k]);
    if (yc.length() > y.length()) {
      rec(k + 1, yc, ib, jb);
      rec(k + 1, y, ib | (Bits(1) << k), jb);
    } else {
      rec(k + 1, y, ib, jb | (Bits(1) << k));
      rec(k + 1, yc, ib | (Bits(1) << k), jb | (Bits(1) << k));
    }
  };
  rec(0, group()->identity(), 0, 0);
}

}  // namespace soergel
