#pragma once

#include <bit>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "soergel/coxeter.hpp"
#include "soergel/hecke.hpp"
#include "soergel/matrix.hpp"
#include "soergel/poly.hpp"

namespace soergel {

using Bits = uint32_t;  // junction selector; bit k-1 <-> k-th tensor factor

inline int bs_degree(int word_len, Bits e) { return 2 * std::popcount(e) - word_len; }

// Lexicographic order on bitstrings read MSB-first from position 1.
inline bool bits_lex_less(Bits a, Bits b, int len) {
  for (int k = 0; k < len; ++k) {
    int ba = (a >> k) & 1, bb = (b >> k) & 1;
    if (ba != bb) return ba < bb;
  }
  return false;
}

inline std::string bits_str(Bits e, int len) {
  std::string s(len, '0');
  for (int k = 0; k < len; ++k)
    if ((e >> k) & 1) s[k] = '1';
  return s;
}

// Element of a Bott-Samelson bimodule B_w in the left-module basis
// {beta^e = 1 (x) x_{w_1}^{e_1} (x) ... (x) x_{w_n}^{e_n}}; the coefficient of
// beta^e is its left polynomial coefficient.  deg beta^e = 2|e| - n with the
// built-in shift.
template <ScalarField K>
class BSElement {
 public:
  BSElement() = default;
  explicit BSElement(Word w) : word_(std::move(w)) {}

  const Word& word() const { return word_; }
  bool is_zero() const { return c_.empty(); }
  const std::map<Bits, Poly<K>>& coeffs() const { return c_; }

  Poly<K> coeff(Bits e) const {
    auto it = c_.find(e);
    return it == c_.end() ? Poly<K>() : it->second;
  }

  void add(Bits e, const Poly<K>& p) {
    if (p.is_zero()) return;
    auto [it, fresh] = c_.try_emplace(e, p);
    if (!fresh) {
      it->second += p;
      if (it->second.is_zero()) c_.erase(it);
    }
  }

  static BSElement basis(const Word& w, Bits e, int rank) {
    BSElement m(w);
    m.add(e, Poly<K>::one(rank));
    return m;
  }
  static BSElement unit_tensor(const Word& w, int rank) { return basis(w, 0, rank); }

  BSElement operator-() const {
    BSElement r(word_);
    for (auto& [e, p] : c_) r.c_.emplace(e, -p);
    return r;
  }
  BSElement& operator+=(const BSElement& o) {
    if (word_ != o.word_) throw TheoryError("BSElement shape mismatch");
    for (auto& [e, p] : o.c_) add(e, p);
    return *this;
  }
  BSElement& operator-=(const BSElement& o) {
    if (word_ != o.word_) throw TheoryError("BSElement shape mismatch");
    for (auto& [e, p] : o.c_) add(e, -p);
    return *this;
  }
  friend BSElement operator+(BSElement a, const BSElement& b) { return a += b; }
  friend BSElement operator-(BSElement a, const BSElement& b) { return a -= b; }
  BSElement scaled(const Poly<K>& f) const {
    BSElement r(word_);
    if (f.is_zero()) return r;
    for (auto& [e, p] : c_) r.add(e, p * f);
    return r;
  }

  bool operator==(const BSElement& o) const { return word_ == o.word_ && c_ == o.c_; }
  bool operator!=(const BSElement& o) const { return !(*this == o); }

  // Uniform degree of a homogeneous element; nullopt when zero.
  std::optional<int> degree() const {
    std::optional<int> d;
    for (auto& [e, p] : c_) {
      if (!p.is_homogeneous()) return std::nullopt;
      int dd = p.degree() + bs_degree(static_cast<int>(word_.size()), e);
      if (d && *d != dd) return std::nullopt;
      d = dd;
    }
    return d;
  }

  std::string str() const {
    if (c_.empty()) return "0";
    std::string s;
    for (auto& [e, p] : c_) {
      if (!s.empty()) s += "  +  ";
      s += "(" + p.str() + ")*b" + bits_str(e, static_cast<int>(word_.size()));
    }
    return s;
  }

 private:
  Word word_;
  std::map<Bits, Poly<K>> c_;
};

// Generator tokens for morphism provenance words.
struct GenAtom {
  enum Kind { M, J, E, P, F } kind;
  int s = 0, r = 0;
  bool operator==(const GenAtom& o) const { return kind == o.kind && s == o.s && r == o.r; }
  std::string str() const {
    switch (kind) {
      case M: return "m" + std::to_string(s + 1);
      case J: return "j" + std::to_string(s + 1);
      case E: return "e" + std::to_string(s + 1);
      case P: return "p" + std::to_string(s + 1);
      case F: return "f" + std::to_string(s + 1) + std::to_string(r + 1);
    }
    return "?";
  }
};

struct GenLayer {
  Word left;
  GenAtom atom;
  Word right;
  bool operator==(const GenLayer& o) const {
    return left == o.left && atom == o.atom && right == o.right;
  }
};

using GenWord = std::vector<GenLayer>;  // applied first-to-last

// Graded bimodule morphism between Bott-Samelson objects, stored as the
// images of the 2^n left-module basis elements; optionally carries its
// generator composition word (leaves do, assembled projectors do not).
template <ScalarField K>
class Morphism {
 public:
  Morphism() : degree_(0) {}
  Morphism(Word src, Word dst, int degree, std::vector<BSElement<K>> images,
           std::optional<GenWord> word = std::nullopt)
      : src_(std::move(src)), dst_(std::move(dst)), degree_(degree), images_(std::move(images)),
        gen_word_(std::move(word)) {}

  const Word& src() const { return src_; }
  const Word& dst() const { return dst_; }
  int degree() const { return degree_; }
  const std::vector<BSElement<K>>& images() const { return images_; }
  const BSElement<K>& image(Bits e) const { return images_[e]; }
  const std::optional<GenWord>& gen_word() const { return gen_word_; }
  void set_gen_word(std::optional<GenWord> w) { gen_word_ = std::move(w); }

  bool is_zero() const {
    for (auto& m : images_)
      if (!m.is_zero()) return false;
    return true;
  }

  BSElement<K> apply(const BSElement<K>& m) const {
    if (m.word() != src_) throw TheoryError("Morphism::apply: shape mismatch");
    BSElement<K> out(dst_);
    for (auto& [e, c] : m.coeffs()) out += images_[e].scaled(c);
    return out;
  }

  Morphism operator+(const Morphism& o) const {
    check_shape(o);
    std::vector<BSElement<K>> im = images_;
    for (size_t i = 0; i < im.size(); ++i) im[i] += o.images_[i];
    return Morphism(src_, dst_, degree_, std::move(im));
  }
  Morphism operator-(const Morphism& o) const {
    check_shape(o);
    std::vector<BSElement<K>> im = images_;
    for (size_t i = 0; i < im.size(); ++i) im[i] -= o.images_[i];
    return Morphism(src_, dst_, degree_, std::move(im));
  }
  Morphism scaled(const K& c) const {
    std::vector<BSElement<K>> im;
    im.reserve(images_.size());
    for (auto& m : images_) im.push_back(m.scaled(Poly<K>::constant(rank_of(m), c)));
    return Morphism(src_, dst_, degree_, std::move(im));
  }
  Morphism scaled_poly(const Poly<K>& f, int deg_shift) const {
    std::vector<BSElement<K>> im;
    im.reserve(images_.size());
    for (auto& m : images_) im.push_back(m.scaled(f));
    return Morphism(src_, dst_, degree_ + deg_shift, std::move(im));
  }

  bool operator==(const Morphism& o) const {
    return src_ == o.src_ && dst_ == o.dst_ && images_ == o.images_;
  }
  bool operator!=(const Morphism& o) const { return !(*this == o); }

 private:
  static int rank_of(const BSElement<K>& m) {
    for (auto& [e, p] : m.coeffs()) return p.rank();
    return 1;
  }
  void check_shape(const Morphism& o) const {
    if (src_ != o.src_ || dst_ != o.dst_ || degree_ != o.degree_)
      throw TheoryError("Morphism shape/degree mismatch");
  }

  Word src_, dst_;
  int degree_;
  std::vector<BSElement<K>> images_;
  std::optional<GenWord> gen_word_;
};

// Morphism from B_w into the twisted bimodule R_x (with grading shift l(x)
// built in, so the generator 1_x sits in degree -l(x)).  Stored as the
// coefficient of 1_x on each source basis element.
template <ScalarField K>
struct RxMorphism {
  Word src;
  Element x;
  Word xword;
  int degree = 0;
  std::vector<Poly<K>> images;  // indexed by source Bits

  Poly<K> apply(const BSElement<K>& m) const {
    if (m.word() != src) throw TheoryError("RxMorphism::apply: shape mismatch");
    Poly<K> out;
    bool init = false;
    for (auto& [e, c] : m.coeffs()) {
      Poly<K> t = c * images[e];
      if (!init) {
        out = t;
        init = true;
      } else {
        out += t;
      }
    }
    return init ? out : Poly<K>();
  }
};

// The monoidal calculus of Bott-Samelson bimodules over the scalar field K:
// normal forms, the generating morphisms, the braid solver, adjunction and
// the cap/beta morphisms.  One instance per (group, K); caches allow
// concurrent readers with serialized writers.
template <ScalarField K>
class Calculus {
 public:
  explicit Calculus(std::shared_ptr<Group> g) : g_(std::move(g)) {}

  Group* group() const { return g_.get(); }
  int rank() const { return g_->rank(); }
  // Number of polynomial variables: the realization dimension.
  int nvars() const { return g_->dim(); }

  Poly<K> poly_one() const { return Poly<K>::one(nvars()); }
  Poly<K> poly_var(int s) const { return Poly<K>::var(nvars(), s); }

  // --- normal form -------------------------------------------------------

  // Rewrites the pure tensor (slots_0, ..., slots_n) in B_w (n = |w|) onto
  // the basis {beta^e}: right to left, each junction content splits by the
  // Demazure decomposition and the invariant parts slide leftward.
  BSElement<K> normal_form(const Word& w, std::vector<Poly<K>> slots) const {
    if (slots.size() != w.size() + 1) throw TheoryError("normal_form: slot count mismatch");
    BSElement<K> out(w);
    nf_rec(w, slots, static_cast<int>(w.size()), 0, out);
    return out;
  }

  BSElement<K> right_mult(const BSElement<K>& m, const Poly<K>& f) const {
    const Word& w = m.word();
    int n = static_cast<int>(w.size());
    BSElement<K> out(w);
    for (auto& [e, c] : m.coeffs()) {
      std::vector<Poly<K>> slots(n + 1, poly_one());
      for (int k = 0; k < n; ++k)
        if ((e >> k) & 1) slots[k + 1] = poly_var(w[k]);
      slots[n] = slots[n] * f;
      out += normal_form(w, std::move(slots)).scaled(c);
    }
    return out;
  }

  // --- constructors with invariant checks ---------------------------------

  Morphism<K> from_images(Word src, Word dst, int degree, std::vector<BSElement<K>> images,
                          std::optional<GenWord> word = std::nullopt) const {
    Morphism<K> m(std::move(src), std::move(dst), degree, std::move(images), std::move(word));
    check_homogeneous(m);
    check_right_linear(m);
    return m;
  }

  void check_homogeneous(const Morphism<K>& m) const {
    int n = static_cast<int>(m.src().size());
    for (Bits e = 0; e < (Bits(1) << n); ++e) {
      auto d = m.image(e).degree();
      if (d && *d != bs_degree(n, e) + m.degree())
        throw TheoryError("morphism image is not homogeneous of the right degree");
      if (!d && !m.image(e).is_zero())
        throw TheoryError("morphism image is inhomogeneous");
    }
  }

  void check_right_linear(const Morphism<K>& m) const {
    int n = static_cast<int>(m.src().size());
    for (Bits e = 0; e < (Bits(1) << n); ++e)
      for (int u = 0; u < nvars(); ++u) {
        BSElement<K> lhs = m.apply(right_mult(BSElement<K>::basis(m.src(), e, nvars()), poly_var(u)));
        BSElement<K> rhs = right_mult(m.image(e), poly_var(u));
        if (lhs != rhs) throw TheoryError("morphism is not right-linear");
      }
  }

  // --- identity and the five generating morphisms --------------------------

  Morphism<K> identity(const Word& w) const {
    int n = static_cast<int>(w.size());
    std::vector<BSElement<K>> im;
    im.reserve(size_t(1) << n);
    for (Bits e = 0; e < (Bits(1) << n); ++e) im.push_back(BSElement<K>::basis(w, e, nvars()));
    return Morphism<K>(w, w, 0, std::move(im), GenWord{});
  }

  Morphism<K> gen_m(int s) const {
    Word src{s}, dst{};
    std::vector<BSElement<K>> im(2, BSElement<K>(dst));
    im[0].add(0, poly_one());
    im[1].add(0, poly_var(s));
    return Morphism<K>(src, dst, +1, std::move(im), GenWord{{Word{}, {GenAtom::M, s}, Word{}}});
  }

  Morphism<K> gen_j(int s) const {
    Word src{s, s}, dst{s};
    std::vector<BSElement<K>> im(4, BSElement<K>(dst));
    // p (x) q (x) r -> p d_s(q) (x) r : only q = x_s survives on the basis.
    im[1].add(0, poly_one());  // 1 (x) x_s (x) 1 -> 1 (x) 1
    im[3].add(1, poly_one());  // 1 (x) x_s (x) x_s -> 1 (x) x_s
    return Morphism<K>(src, dst, -1, std::move(im), GenWord{{Word{}, {GenAtom::J, s}, Word{}}});
  }

  Morphism<K> gen_eps(int s) const {
    Word src{}, dst{s};
    std::vector<BSElement<K>> im(1, BSElement<K>(dst));
    im[0].add(0, poly_var(s));
    im[0].add(1, poly_one());
    return Morphism<K>(src, dst, +1, std::move(im), GenWord{{Word{}, {GenAtom::E, s}, Word{}}});
  }

  Morphism<K> gen_p(int s) const {
    Word src{s}, dst{s, s};
    std::vector<BSElement<K>> im(2, BSElement<K>(dst));
    im[0].add(0, poly_one());  // 1 (x) 1 -> 1 (x) 1 (x) 1
    im[1].add(2, poly_one());  // 1 (x) x_s -> 1 (x) 1 (x) x_s
    return Morphism<K>(src, dst, -1, std::move(im), GenWord{{Word{}, {GenAtom::P, s}, Word{}}});
  }

  static Word x_word(int s, int r, int m) {
    Word w;
    for (int k = 0; k < m; ++k) w.push_back(k % 2 == 0 ? s : r);
    return w;
  }

  // The unique degree-0 morphism X_sr -> X_rs fixing the unit tensor, found
  // by a linear solve; doubles as a realization validator.
  Morphism<K> braid_morphism(int s, int r);

  // --- composition calculus ------------------------------------------------

  Morphism<K> compose(const Morphism<K>& g, const Morphism<K>& f) const {
    if (f.dst() != g.src()) throw TheoryError("compose: shape mismatch");
    std::vector<BSElement<K>> im;
    im.reserve(f.images().size());
    for (auto& m : f.images()) im.push_back(g.apply(m));
    std::optional<GenWord> w;
    if (f.gen_word() && g.gen_word()) {
      w = *f.gen_word();
      w->insert(w->end(), g.gen_word()->begin(), g.gen_word()->end());
    }
    return Morphism<K>(f.src(), g.dst(), f.degree() + g.degree(), std::move(im), std::move(w));
  }

  Morphism<K> tensor3(const Word& left, const Morphism<K>& f, const Word& right) const {
    Word src = left, dst = left;
    src.insert(src.end(), f.src().begin(), f.src().end());
    src.insert(src.end(), right.begin(), right.end());
    dst.insert(dst.end(), f.dst().begin(), f.dst().end());
    dst.insert(dst.end(), right.begin(), right.end());
    int nl = static_cast<int>(left.size());
    int ns = static_cast<int>(f.src().size());
    int nd = static_cast<int>(f.dst().size());
    int nr = static_cast<int>(right.size());
    int n = nl + ns + nr;
    std::vector<BSElement<K>> im(size_t(1) << n, BSElement<K>(dst));
    for (Bits e = 0; e < (Bits(1) << n); ++e) {
      Bits a = e & ((Bits(1) << nl) - 1);
      Bits mid = (e >> nl) & ((Bits(1) << ns) - 1);
      Bits b = e >> (nl + ns);
      for (auto& [h, c] : f.image(mid).coeffs()) {
        // c crosses the junction after the left frame; renormalize.
        std::vector<Poly<K>> slots(static_cast<size_t>(nl + nd + nr) + 1, poly_one());
        for (int k = 0; k < nl; ++k)
          if ((a >> k) & 1) slots[k + 1] = poly_var(left[k]);
        slots[nl] = slots[nl] * c;
        for (int k = 0; k < nd; ++k)
          if ((h >> k) & 1) slots[nl + k + 1] = poly_var(f.dst()[k]);
        for (int k = 0; k < nr; ++k)
          if ((b >> k) & 1) slots[nl + nd + k + 1] = poly_var(right[k]);
        im[e] += normal_form(dst, std::move(slots));
      }
    }
    std::optional<GenWord> w;
    if (f.gen_word()) {
      w = GenWord{};
      for (const GenLayer& l : *f.gen_word()) {
        GenLayer nl2 = l;
        Word lw = left;
        lw.insert(lw.end(), l.left.begin(), l.left.end());
        nl2.left = std::move(lw);
        nl2.right.insert(nl2.right.end(), right.begin(), right.end());
        w->push_back(std::move(nl2));
      }
    }
    return Morphism<K>(std::move(src), std::move(dst), f.degree(), std::move(im), std::move(w));
  }

  Morphism<K> atom_morphism(const GenAtom& a) {
    switch (a.kind) {
      case GenAtom::M: return gen_m(a.s);
      case GenAtom::J: return gen_j(a.s);
      case GenAtom::E: return gen_eps(a.s);
      case GenAtom::P: return gen_p(a.s);
      case GenAtom::F: return braid_morphism(a.s, a.r);
    }
    throw TheoryError("unknown atom");
  }

  static GenAtom atom_adjoint(const GenAtom& a) {
    switch (a.kind) {
      case GenAtom::M: return {GenAtom::E, a.s};
      case GenAtom::E: return {GenAtom::M, a.s};
      case GenAtom::J: return {GenAtom::P, a.s};
      case GenAtom::P: return {GenAtom::J, a.s};
      case GenAtom::F: return {GenAtom::F, a.r, a.s};
    }
    throw TheoryError("unknown atom");
  }

  // Rebuilds a morphism from its generator word, starting at `src`.
  Morphism<K> from_gen_word(const Word& src, const GenWord& w) {
    Morphism<K> m = identity(src);
    for (const GenLayer& l : w) m = compose(tensor3(l.left, atom_morphism(l.atom), l.right), m);
    return m;
  }

  // Adjoint: reverse the composition word and swap each generator with its
  // adjoint; degree is preserved (asserted).
  Morphism<K> adjoint(const Morphism<K>& f) {
    if (!f.gen_word()) throw TheoryError("adjoint: morphism lacks a generator decomposition");
    GenWord w;
    for (auto it = f.gen_word()->rbegin(); it != f.gen_word()->rend(); ++it)
      w.push_back({it->left, atom_adjoint(it->atom), it->right});
    Morphism<K> a = from_gen_word(f.dst(), w);
    if (a.degree() != f.degree()) throw TheoryError("adjoint degree mismatch");
    if (a.src() != f.dst() || a.dst() != f.src()) throw TheoryError("adjoint shape mismatch");
    return a;
  }

  // Counit cap B_u B_{u^op} -> R built from the (m o j) chain; cached.
  std::shared_ptr<const Morphism<K>> cap(const Word& u) {
    {
      std::lock_guard lock(mtx_);
      auto it = cap_cache_.find(u);
      if (it != cap_cache_.end()) return it->second;
    }
    int a = static_cast<int>(u.size());
    Morphism<K> m = identity(Word{});
    for (int k = a; k >= 1; --k) {
      Word frame(u.begin(), u.begin() + (k - 1));
      Word rframe(frame.rbegin(), frame.rend());
      Morphism<K> mj = compose(gen_m(u[k - 1]), gen_j(u[k - 1]));
      Morphism<K> layer = tensor3(frame, mj, rframe);
      m = (k == a) ? layer : compose(layer, m);
    }
    auto sp = std::make_shared<const Morphism<K>>(std::move(m));
    std::lock_guard lock(mtx_);
    cap_cache_.emplace(u, sp);
    return sp;
  }

  // Cup R -> B_u B_{u^op}, the adjoint chain of cap (p o eps); used by tests.
  Morphism<K> cup(const Word& u) {
    int a = static_cast<int>(u.size());
    Morphism<K> m = identity(Word{});
    for (int k = 1; k <= a; ++k) {
      Word frame(u.begin(), u.begin() + (k - 1));
      Word rframe(frame.rbegin(), frame.rend());
      Morphism<K> pe = compose(gen_p(u[k - 1]), gen_eps(u[k - 1]));
      Morphism<K> layer = tensor3(frame, pe, rframe);
      m = (k == 1) ? layer : compose(layer, m);
    }
    return m;
  }

  // beta: B_{x_word} -> R_x, p_0 (x) ... (x) p_n -> prod_i (x_1...x_i)(p_i).
  RxMorphism<K> beta(const Word& xword) {
    int n = static_cast<int>(xword.size());
    RxMorphism<K> rx;
    rx.src = xword;
    rx.xword = xword;
    rx.x = g_->element_of(xword);
    rx.degree = 0;
    std::vector<Element> prefixes;
    Element cur = g_->identity();
    for (int i = 0; i < n; ++i) {
      cur = cur.times(xword[i]);
      prefixes.push_back(cur);
    }
    rx.images.resize(size_t(1) << n);
    for (Bits e = 0; e < (Bits(1) << n); ++e) {
      Poly<K> v = poly_one();
      for (int i = 0; i < n; ++i)
        if ((e >> i) & 1) v = v * act<K>(prefixes[i], poly_var(xword[i]));
      rx.images[e] = v;
    }
    return rx;
  }

  // Composition (beta o f) for f : B_w -> B_{x_word}.
  RxMorphism<K> compose_rx(const RxMorphism<K>& rx, const Morphism<K>& f) const {
    if (f.dst() != rx.src) throw TheoryError("compose_rx: shape mismatch");
    RxMorphism<K> out;
    out.src = f.src();
    out.x = rx.x;
    out.xword = rx.xword;
    out.degree = rx.degree + f.degree();
    out.images.resize(f.images().size());
    for (size_t e = 0; e < f.images().size(); ++e) {
      Poly<K> v(nvars());
      for (auto& [h, c] : f.image(static_cast<Bits>(e)).coeffs()) v += c * rx.images[h];
      out.images[e] = v;
    }
    return out;
  }

 private:
  void nf_rec(const Word& w, std::vector<Poly<K>>& slots, int k, Bits suffix,
              BSElement<K>& out) const {
    if (k == 0) {
      out.add(suffix, slots[0]);
      return;
    }
    if (slots[k].is_zero()) return;
    auto [plus, del] = soergel::demazure_split<K>(g_->datum().reflection(w[k - 1]), w[k - 1], slots[k]);
    Poly<K> saved = std::move(slots[k - 1]);
    if (!plus.is_zero()) {
      slots[k - 1] = saved * plus;
      nf_rec(w, slots, k - 1, suffix, out);
    }
    if (!del.is_zero()) {
      slots[k - 1] = saved * del;
      nf_rec(w, slots, k - 1, suffix | (Bits(1) << (k - 1)), out);
    }
    slots[k - 1] = std::move(saved);
  }

  std::shared_ptr<Group> g_;
  std::mutex mtx_;
  std::map<std::pair<int, int>, std::shared_ptr<const Morphism<K>>> braid_cache_;
  std::map<Word, std::shared_ptr<const Morphism<K>>> cap_cache_;
};

// Canonical text serialization of a morphism (sources ascending, canonical
// polynomial text); hashing this gives the integrity digest used by caches.
template <ScalarField K>
std::string morphism_canonical_string(const Morphism<K>& f) {
  std::string s = word_str(f.src()) + ">" + word_str(f.dst()) +
                  "@" + std::to_string(f.degree());
  int n = static_cast<int>(f.src().size());
  for (Bits e = 0; e < (Bits(1) << n); ++e) {
    s += "|" + bits_str(e, n) + ":";
    for (auto& [h, c] : f.image(e).coeffs())
      s += bits_str(h, static_cast<int>(f.dst().size())) + "=" + c.str() + ";";
  }
  return s;
}

// Generator-word serialization, e.g. "[s1|m2|s2.s1]"; empty for identities.
inline std::string gen_word_str(const GenWord& w) {
  std::string s;
  for (const GenLayer& l : w)
    s += "[" + word_str(l.left) + "|" + l.atom.str() + "|" + word_str(l.right) + "]";
  return s;
}

// --- braid solver -----------------------------------------------------------

namespace detail {
inline void monomials_of_exponent_sum(int rank, int total, Monomial& cur, int from,
                                      std::vector<Monomial>& out) {
  if (from == rank - 1) {
    cur[from] = static_cast<uint8_t>(total);
    out.push_back(cur);
    cur[from] = 0;
    return;
  }
  for (int e = 0; e <= total; ++e) {
    cur[from] = static_cast<uint8_t>(e);
    monomials_of_exponent_sum(rank, total - e, cur, from + 1, out);
  }
  cur[from] = 0;
}

inline std::vector<Monomial> monomials_of_degree(int rank, int degree) {
  std::vector<Monomial> out;
  if (degree < 0 || degree % 2 != 0) return out;
  Monomial cur(rank, 0);
  monomials_of_exponent_sum(rank, degree / 2, cur, 0, out);
  return out;
}
}  // namespace detail

template <ScalarField K>
Morphism<K> Calculus<K>::braid_morphism(int s, int r) {
  {
    std::lock_guard lock(mtx_);
    auto it = braid_cache_.find({s, r});
    if (it != braid_cache_.end()) return *it->second;
  }
  int m = g_->datum().coxeter_m(s, r);
  if (m == 0) throw TheoryError("braid_morphism: m(s,r) is infinite");
  Word src = x_word(s, r, m), dst = x_word(r, s, m);
  int n = m;
  int nv = g_->dim();
  // Unknowns: for each (e_src, e_dst) with |e_src| >= |e_dst|, the scalar
  // coefficients of the homogeneous polynomial of degree 2(|e_src|-|e_dst|).
  struct Var {
    Bits es, ed;
    Monomial mono;
  };
  std::vector<Var> vars;
  std::map<std::tuple<Bits, Bits, Monomial>, int> var_index;
  for (Bits es = 0; es < (Bits(1) << n); ++es)
    for (Bits ed = 0; ed < (Bits(1) << n); ++ed) {
      int d = 2 * (std::popcount(es) - std::popcount(ed));
      for (const Monomial& mo : detail::monomials_of_degree(nv, d)) {
        var_index.emplace(std::make_tuple(es, ed, mo), static_cast<int>(vars.size()));
        vars.push_back({es, ed, mo});
      }
    }
  // Linear expression over the unknowns.
  using Expr = std::map<int, K>;
  auto expr_add = [](Expr& a, int v, const K& c) {
    if (c.is_zero()) return;
    auto [it, fresh] = a.try_emplace(v, c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero()) a.erase(it);
    }
  };
  // image coefficient c_{es,ed} as an Expr-valued polynomial
  auto unknown_coeff = [&](Bits es, Bits ed) {
    std::map<Monomial, Expr> out;
    int d = 2 * (std::popcount(es) - std::popcount(ed));
    for (const Monomial& mo : detail::monomials_of_degree(nv, d)) {
      Expr e;
      expr_add(e, var_index.at(std::make_tuple(es, ed, mo)), K::from_int(1));
      out.emplace(mo, std::move(e));
    }
    return out;
  };
  // rows of the linear system
  std::vector<Expr> rows;
  std::vector<K> rhs;
  auto emit = [&](std::map<std::pair<Bits, Monomial>, Expr>& acc) {
    for (auto& [key, e] : acc) {
      if (e.empty()) continue;
      rows.push_back(std::move(e));
      rhs.push_back(K());
    }
  };
  // (a) normalization f(unit tensor) = unit tensor
  {
    Expr e;
    expr_add(e, var_index.at(std::make_tuple(Bits(0), Bits(0), Monomial(nv, 0))), K::from_int(1));
    rows.push_back(std::move(e));
    rhs.push_back(K::from_int(1));
  }
  // (b) right-linearity on every degree-2 generator
  for (Bits es = 0; es < (Bits(1) << n); ++es)
    for (int u = 0; u < nv; ++u) {
      // LHS: f(beta^{es} x_u) = sum_g d_g f(beta^g)
      BSElement<K> moved = right_mult(BSElement<K>::basis(src, es, nv), poly_var(u));
      std::map<std::pair<Bits, Monomial>, Expr> acc;
      for (auto& [g, dg] : moved.coeffs()) {
        auto coeffs = [&](Bits ed) { return unknown_coeff(g, ed); };
        for (Bits ed = 0; ed < (Bits(1) << n); ++ed) {
          if (std::popcount(g) < std::popcount(ed)) continue;
          for (auto& [mo, ex] : coeffs(ed))
            for (auto& [dmono, dc] : dg.terms()) {
              Monomial prod(nv);
              for (int i = 0; i < nv; ++i) prod[i] = static_cast<uint8_t>(mo[i] + dmono[i]);
              for (auto& [v, c] : ex) expr_add(acc[{ed, prod}], v, c * dc);
            }
        }
      }
      // RHS: f(beta^{es}) x_u = sum_ed c_{es,ed} (beta^{ed} x_u)
      for (Bits ed = 0; ed < (Bits(1) << n); ++ed) {
        if (std::popcount(es) < std::popcount(ed)) continue;
        BSElement<K> tgt = right_mult(BSElement<K>::basis(dst, ed, nv), poly_var(u));
        for (auto& [mo, ex] : unknown_coeff(es, ed))
          for (auto& [k, pk] : tgt.coeffs())
            for (auto& [pmono, pc] : pk.terms()) {
              Monomial prod(nv);
              for (int i = 0; i < nv; ++i) prod[i] = static_cast<uint8_t>(mo[i] + pmono[i]);
              for (auto& [v, c] : ex) expr_add(acc[{k, prod}], v, -(c * pc));
            }
      }
      emit(acc);
    }
  Matrix<K> A(static_cast<int>(rows.size()), static_cast<int>(vars.size()));
  Matrix<K> B(static_cast<int>(rows.size()), 1);
  for (size_t i = 0; i < rows.size(); ++i) {
    for (auto& [v, c] : rows[i]) A.at(static_cast<int>(i), v) = c;
    B.at(static_cast<int>(i), 0) = rhs[i];
  }
  bool unique = false;
  auto sol = A.solve(B, &unique);
  if (!sol)
    throw TheoryError("braid_morphism: no degree-0 morphism fixes the unit tensor; realization "
                      "invalid for pair (" + std::to_string(s + 1) + "," + std::to_string(r + 1) + ")");
  if (!unique)
    throw TheoryError("braid_morphism: morphism space has positive dimension; realization "
                      "invalid for pair (" + std::to_string(s + 1) + "," + std::to_string(r + 1) + ")");
  std::vector<BSElement<K>> images(size_t(1) << n, BSElement<K>(dst));
  for (size_t vi = 0; vi < vars.size(); ++vi) {
    const K& c = sol->at(static_cast<int>(vi), 0);
    if (c.is_zero()) continue;
    Poly<K> mono(nv);
    mono += Poly<K>::constant(nv, c);
    for (int i = 0; i < nv; ++i)
      for (int e = 0; e < vars[vi].mono[i]; ++e) mono = mono * poly_var(i);
    images[vars[vi].es].add(vars[vi].ed, mono);
  }
  Morphism<K> f = from_images(src, dst, 0, std::move(images),
                              GenWord{{Word{}, {GenAtom::F, s, r}, Word{}}});
  auto sp = std::make_shared<const Morphism<K>>(f);
  std::lock_guard lock(mtx_);
  braid_cache_.emplace(std::make_pair(s, r), sp);
  return f;
}

}  // namespace soergel
