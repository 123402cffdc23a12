#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "soergel/error.hpp"
#include "soergel/intmatrix.hpp"
#include "soergel/matrix.hpp"
#include "soergel/poly.hpp"

namespace soergel {

using Word = std::vector<int>;  // 0-based simple reflection indices

std::string word_str(const Word& w);                 // "s1.s2.s1", "e"
std::optional<Word> word_parse(const std::string&);  // inverse of word_str

// Crystallographic Coxeter datum: a generalized Cartan matrix together with
// its realization on V* = span{x_s}, where s acts by x_j -> x_j - a(s,j) x_s.
class CoxeterDatum {
 public:
  CoxeterDatum(std::string label, int rank, std::vector<long long> cartan_row_major);

  static CoxeterDatum named(const std::string& type);  // A1, A2, A3, B2, G2, A1xA1, A1~
  static CoxeterDatum from_json_file(const std::string& path);

  const std::string& label() const { return label_; }
  int rank() const { return rank_; }
  // Realization dimension: rank plus the corank of the Cartan matrix (affine
  // types carry one extra weight coordinate so that graph intersections of
  // non-reflections drop below codimension one).
  int dim() const { return dim_; }
  long long cartan(int s, int t) const { return cartan_[static_cast<size_t>(s) * rank_ + t]; }
  bool finite_type() const { return finite_; }

  // Order m(s,r) of sr; 0 encodes infinity.
  int coxeter_m(int s, int r) const;
  const IntMatrix& reflection(int s) const { return refl_[s]; }

  // Stable digest input: label, Cartan entries and the braid-path
  // tie-breaking version, so cache keys change if path choices ever do.
  std::string fingerprint() const;

 private:
  std::string label_;
  int rank_;
  int dim_;
  std::vector<long long> cartan_;
  std::vector<IntMatrix> refl_;
  bool finite_;
};

class Group;

// Lightweight handle to a group element; equality is by action matrix on the
// validated working region (the registry guarantees one id per matrix).
class Element {
 public:
  Element() : g_(nullptr), id_(0) {}
  Element(Group* g, uint32_t id) : g_(g), id_(id) {}

  Group* group() const { return g_; }
  uint32_t id() const { return id_; }
  int length() const;
  Word shortlex_word() const;
  const IntMatrix& matrix() const;
  Element inverse() const;
  Element times(int s) const;       // right multiplication by a generator
  Element times(const Element&) const;

  friend bool operator==(const Element& a, const Element& b) {
    return a.g_ == b.g_ && a.id_ == b.id_;
  }
  friend bool operator!=(const Element& a, const Element& b) { return !(a == b); }
  friend bool operator<(const Element& a, const Element& b) { return a.id_ < b.id_; }

 private:
  Group* g_;
  uint32_t id_;
};

// One braid move inside a word: positions [pos, pos+m) change from the
// (s,r,s,...) pattern to the (r,s,r,...) pattern.
struct BraidMove {
  int pos;
  int s, r;  // pattern before the move starts with s
  int m;
  bool operator==(const BraidMove& o) const {
    return pos == o.pos && s == o.s && r == o.r && m == o.m;
  }
};

Word apply_braid_move(const Word& w, const BraidMove& mv);

// Graph of all reduced expressions of one element, edges labelled by braid
// moves; connected by Matsumoto's theorem (checked when built).
struct GreGraph {
  std::vector<Word> nodes;
  std::map<Word, int> index;
  struct Edge {
    int from, to;
    BraidMove move;
  };
  std::vector<Edge> edges;
};

// Group registry.  Elements are enumerated breadth-first by length, so
// lengths, ShortLex words and descents are always consistent; growth is
// on demand and thread-safe (shared reads, serialized writes).
class Group : public std::enable_shared_from_this<Group> {
 public:
  explicit Group(CoxeterDatum datum);

  const CoxeterDatum& datum() const { return datum_; }
  int rank() const { return datum_.rank(); }
  int dim() const { return datum_.dim(); }

  Element identity() { return Element(this, 0); }
  Element element_of(const Word& w);
  Element generator(int s);

  int length(uint32_t id);
  Word shortlex(uint32_t id);
  const IntMatrix& matrix(uint32_t id);
  uint32_t inverse(uint32_t id);
  uint32_t mul_gen(uint32_t id, int s);      // right product
  uint32_t mul_gen_left(int s, uint32_t id); // left product
  uint32_t mul(uint32_t a, uint32_t b);
  bool has_right_descent(uint32_t id, int s);

  // Subword criterion.
  bool bruhat_leq(Element x, Element y);

  // All elements of length <= len, ordered by (length, ShortLex).
  std::vector<Element> elements_up_to_length(int len);
  // {w | w <= top}, ordered by (length, ShortLex); checked closed under <=.
  std::vector<Element> bruhat_ideal(Element top);

  std::shared_ptr<const GreGraph> gre_graph(Element x);

  // Deterministic path of braid moves from `w` to a reduced word ending in
  // s; requires l(xs) < l(x).  The same path is returned on every call.
  std::vector<BraidMove> braid_path(const Word& w, int s);
  // Deterministic path from any reduced word of x to canonical_word(x).
  std::vector<BraidMove> path_to_canonical(const Word& w);

  // The fixed reduced word per element, chosen so that the reversal pairing
  // canonical_word(x)^rev = canonical_word(x^{-1}) holds whenever a
  // palindromic choice exists for involutions.
  Word canonical_word(Element x);
  bool palindrome_fallback(Element x);
  // Elements (in the enumerated range) whose canonical word needed the
  // ShortLex fallback.
  std::vector<Element> palindrome_fallbacks_up_to(int len);

  // True when x is a reflection (conjugate of a simple reflection).
  bool is_reflection(Element x);

 private:
  struct Elem {
    IntMatrix mat;
    int length;
    Word shortlex;
    uint32_t inv;
    std::vector<int32_t> right;  // rank entries, -1 unknown
    std::vector<int32_t> left;
  };

  void ensure_length(int len);          // takes unique lock internally
  void grow_one_layer_locked();         // caller holds unique lock
  uint32_t lookup_locked(const IntMatrix& m) const;

  CoxeterDatum datum_;
  mutable std::shared_mutex reg_mtx_;
  std::deque<Elem> elems_;
  std::unordered_map<std::string, uint32_t> by_matrix_;
  int completed_length_ = 0;   // all elements of length <= this are present with products
  bool finite_complete_ = false;

  std::mutex comb_mtx_;  // guards the word-combinatorics caches below
  std::map<uint32_t, std::shared_ptr<const GreGraph>> gre_cache_;
  std::map<std::pair<Word, int>, std::vector<BraidMove>> path_cache_;
  std::map<Word, std::vector<BraidMove>> canon_path_cache_;
  std::map<uint32_t, Word> canon_cache_;
  std::map<uint32_t, bool> palindrome_fallback_;
  std::map<uint32_t, bool> reflection_cache_;
};

// The poly-module action: ring automorphism of R attached to a group element.
template <ScalarField K>
Poly<K> act(const Element& w, const Poly<K>& f) {
  if (f.rank() != w.group()->dim()) throw TheoryError("act: datum mismatch");
  return act_matrix(w.matrix(), f);
}

template <ScalarField K>
std::pair<Poly<K>, Poly<K>> demazure_split(Group& g, int s, const Poly<K>& f) {
  return demazure_split<K>(g.datum().reflection(s), s, f);
}

struct RealizationIssue {
  std::string what;
  Word x, y, z;
};

struct RealizationReport {
  bool pass = true;
  std::vector<RealizationIssue> issues;
};

// W'-reflection validation of the realization over K on a Bruhat-closed
// region: codimension-one graph intersections occur exactly at reflections,
// and no two distinct intersections with a common y coincide.
template <ScalarField K>
RealizationReport validate_realization(Group& g, const std::vector<Element>& region) {
  RealizationReport rep;
  int n = g.dim();
  auto mat_of = [&](const Element& e) { return Matrix<K>::from_int(e.matrix()); };
  // kernel of (A_x - A_y) as an RREF matrix for subspace comparison
  struct Pairing {
    size_t xi, yi;
    Matrix<K> diff;
  };
  std::vector<Pairing> codim1;
  for (size_t i = 0; i < region.size(); ++i) {
    for (size_t j = 0; j < region.size(); ++j) {
      if (i == j) continue;
      Matrix<K> d = mat_of(region[i]) - mat_of(region[j]);
      int kdim = d.kernel_dim();
      Element q = region[i].inverse().times(region[j]);
      bool refl = g.is_reflection(q);
      if ((kdim == n - 1) != refl) {
        rep.pass = false;
        rep.issues.push_back({refl ? "reflection pair without codimension-1 intersection"
                                   : "codimension-1 intersection at a non-reflection",
                              g.canonical_word(region[i]), g.canonical_word(region[j]), {}});
      }
      if (kdim == n - 1) codim1.push_back({i, j, std::move(d)});
    }
  }
  // Same kernel test: ker(M1) == ker(M2) iff rank(M1) == rank([M1;M2]) == rank(M2).
  auto same_kernel = [&](const Matrix<K>& m1, const Matrix<K>& m2) {
    Matrix<K> st(m1.rows() + m2.rows(), n);
    for (int r = 0; r < m1.rows(); ++r)
      for (int c = 0; c < n; ++c) st.at(r, c) = m1.at(r, c);
    for (int r = 0; r < m2.rows(); ++r)
      for (int c = 0; c < n; ++c) st.at(m1.rows() + r, c) = m2.at(r, c);
    int r1 = m1.rank();
    return r1 == m2.rank() && r1 == st.rank();
  };
  for (size_t a = 0; a < codim1.size(); ++a)
    for (size_t b = a + 1; b < codim1.size(); ++b) {
      if (codim1[a].yi != codim1[b].yi || codim1[a].xi == codim1[b].xi) continue;
      if (same_kernel(codim1[a].diff, codim1[b].diff)) {
        rep.pass = false;
        rep.issues.push_back({"two codimension-1 intersections coincide",
                              g.canonical_word(region[codim1[a].xi]),
                              g.canonical_word(region[codim1[a].yi]),
                              g.canonical_word(region[codim1[b].xi])});
      }
    }
  return rep;
}

}  // namespace soergel
