#include "soergel/coxeter.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <sstream>

namespace soergel {

namespace {
constexpr const char* kBraidTieBreakVersion = "bfs-pos-pair-v1";
}

std::string word_str(const Word& w) {
  if (w.empty()) return "e";
  std::ostringstream os;
  for (size_t i = 0; i < w.size(); ++i) {
    if (i) os << ".";
    os << "s" << (w[i] + 1);
  }
  return os.str();
}

std::optional<Word> word_parse(const std::string& s) {
  if (s == "e" || s.empty()) return Word{};
  Word w;
  size_t i = 0;
  while (i < s.size()) {
    if (s[i] != 's') return std::nullopt;
    ++i;
    std::string num;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) num += s[i++];
    if (num.empty()) return std::nullopt;
    int v = std::stoi(num) - 1;
    if (v < 0) return std::nullopt;
    w.push_back(v);
    if (i < s.size()) {
      if (s[i] != '.') return std::nullopt;
      ++i;
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// CoxeterDatum

CoxeterDatum::CoxeterDatum(std::string label, int rank, std::vector<long long> cartan_entries)
    : label_(std::move(label)), rank_(rank), cartan_(std::move(cartan_entries)) {
  if (rank_ <= 0 || cartan_.size() != static_cast<size_t>(rank_) * rank_)
    throw ConfigError("Cartan matrix size does not match rank");
  for (int s = 0; s < rank_; ++s) {
    if (cartan(s, s) != 2) throw ConfigError("Cartan diagonal entry must be 2");
    for (int t = 0; t < rank_; ++t)
      if (s != t && cartan(s, t) > 0) throw ConfigError("Cartan off-diagonal entries must be <= 0");
  }
  // Corank of the Cartan matrix decides how many weight coordinates the
  // realization needs beyond the simple roots (Kac realization).
  Matrix<Rational> cq(rank_, rank_);
  for (int i = 0; i < rank_; ++i)
    for (int j = 0; j < rank_; ++j) cq.at(i, j) = Rational(cartan(i, j));
  int corank = rank_ - cq.rank();
  if (corank > 1)
    throw ConfigError("Cartan matrices of corank > 1 are not supported");
  dim_ = rank_ + corank;
  for (int s = 0; s < rank_; ++s) {
    IntMatrix m = IntMatrix::identity(dim_);
    for (int j = 0; j < rank_; ++j) m.at(s, j) -= cartan(s, j);
    // the extra coordinate pairs with the first coroot only: <L, a_s^v> = d_{s,1}
    if (corank == 1 && s == 0) m.at(0, rank_) -= 1;
    refl_.push_back(m);
  }
  // Involutions and braid relations of the realization.
  for (int s = 0; s < rank_; ++s)
    if (refl_[s] * refl_[s] != IntMatrix::identity(dim_))
      throw ConfigError("realization matrix is not an involution");
  finite_ = corank == 0;
  for (int s = 0; s < rank_; ++s)
    for (int r = s + 1; r < rank_; ++r) {
      int m = coxeter_m(s, r);
      if (m == 0) {
        finite_ = false;
        continue;
      }
      IntMatrix p = refl_[s] * refl_[r];
      IntMatrix acc = IntMatrix::identity(dim_);
      for (int k = 0; k < m; ++k) acc = acc * p;
      if (acc != IntMatrix::identity(dim_))
        throw ConfigError("realization violates braid relation at pair (" +
                          std::to_string(s + 1) + "," + std::to_string(r + 1) + ")");
    }
}

int CoxeterDatum::coxeter_m(int s, int r) const {
  if (s == r) return 1;
  long long p = cartan(s, r) * cartan(r, s);
  switch (p) {
    case 0: return 2;
    case 1: return 3;
    case 2: return 4;
    case 3: return 6;
    default: return 0;  // infinite order
  }
}

std::string CoxeterDatum::fingerprint() const {
  std::ostringstream os;
  os << label_ << "|rank=" << rank_ << "|cartan=";
  for (long long v : cartan_) os << v << ",";
  os << "|paths=" << kBraidTieBreakVersion;
  return os.str();
}

CoxeterDatum CoxeterDatum::named(const std::string& type) {
  auto mk = [&](int rank, std::vector<long long> c) { return CoxeterDatum(type, rank, std::move(c)); };
  if (type == "A1") return mk(1, {2});
  if (type == "A2") return mk(2, {2, -1, -1, 2});
  if (type == "A3") return mk(3, {2, -1, 0, -1, 2, -1, 0, -1, 2});
  if (type == "B2") return mk(2, {2, -1, -2, 2});
  if (type == "G2") return mk(2, {2, -1, -3, 2});
  if (type == "A1xA1") return mk(2, {2, 0, 0, 2});
  if (type == "A1~" || type == "At1") return CoxeterDatum("A1~", 2, {2, -2, -2, 2});
  throw ConfigError("unknown Cartan type '" + type + "'");
}

// ---------------------------------------------------------------------------
// Element

int Element::length() const { return g_->length(id_); }
Word Element::shortlex_word() const { return g_->shortlex(id_); }
const IntMatrix& Element::matrix() const { return g_->matrix(id_); }
Element Element::inverse() const { return Element(g_, g_->inverse(id_)); }
Element Element::times(int s) const { return Element(g_, g_->mul_gen(id_, s)); }
Element Element::times(const Element& o) const {
  if (g_ != o.g_) throw TheoryError("element product across different groups");
  return Element(g_, g_->mul(id_, o.id_));
}

// ---------------------------------------------------------------------------
// Group registry

Group::Group(CoxeterDatum datum) : datum_(std::move(datum)) {
  Elem e{IntMatrix::identity(datum_.dim()), 0, {}, 0,
         std::vector<int32_t>(datum_.rank(), -1), std::vector<int32_t>(datum_.rank(), -1)};
  by_matrix_.emplace(e.mat.key(), 0);
  elems_.push_back(std::move(e));
  completed_length_ = 0;
  ensure_length(1);
}

uint32_t Group::lookup_locked(const IntMatrix& m) const {
  auto it = by_matrix_.find(m.key());
  return it == by_matrix_.end() ? UINT32_MAX : it->second;
}

void Group::grow_one_layer_locked() {
  int top = completed_length_;
  // Pass 1: right products of the top layer create the next layer.
  size_t count = elems_.size();
  for (size_t i = 0; i < count; ++i) {
    if (elems_[i].length != top) continue;
    for (int s = 0; s < rank(); ++s) {
      if (elems_[i].right[s] >= 0) continue;
      IntMatrix m = elems_[i].mat * datum_.reflection(s);
      uint32_t id = lookup_locked(m);
      if (id == UINT32_MAX) {
        Elem e;
        e.mat = m;
        e.length = top + 1;
        e.inv = UINT32_MAX;
        e.right.assign(rank(), -1);
        e.left.assign(rank(), -1);
        id = static_cast<uint32_t>(elems_.size());
        by_matrix_.emplace(e.mat.key(), id);
        elems_.push_back(std::move(e));
      }
      elems_[i].right[s] = static_cast<int32_t>(id);
    }
  }
  bool grew = elems_.size() > count;
  // Pass 2: ShortLex words for the new layer (smallest left descent first).
  for (size_t i = count; i < elems_.size(); ++i) {
    for (int s = 0; s < rank(); ++s) {
      IntMatrix m = datum_.reflection(s) * elems_[i].mat;
      uint32_t down = lookup_locked(m);
      if (down != UINT32_MAX && elems_[down].length == top) {
        elems_[i].shortlex.reserve(top + 1);
        elems_[i].shortlex.push_back(s);
        elems_[i].shortlex.insert(elems_[i].shortlex.end(), elems_[down].shortlex.begin(),
                                  elems_[down].shortlex.end());
        break;
      }
    }
    if (elems_[i].shortlex.empty())
      throw TheoryError("BFS layer element without a left descent");
  }
  // Pass 3: left products and inverses for the top layer and new layer.
  for (size_t i = 0; i < elems_.size(); ++i) {
    if (elems_[i].length != top && elems_[i].length != top + 1) continue;
    if (elems_[i].length == top)
      for (int s = 0; s < rank(); ++s) {
        if (elems_[i].left[s] >= 0) continue;
        uint32_t id = lookup_locked(datum_.reflection(s) * elems_[i].mat);
        if (id != UINT32_MAX) elems_[i].left[s] = static_cast<int32_t>(id);
      }
    if (elems_[i].inv == UINT32_MAX) {
      // reverse of the ShortLex word, folded through known products
      uint32_t id = 0;
      const Word& w = elems_[i].shortlex;
      bool ok = true;
      for (auto it = w.rbegin(); it != w.rend(); ++it) {
        int32_t nx = elems_[id].right[*it];
        if (nx < 0) { ok = false; break; }
        id = static_cast<uint32_t>(nx);
      }
      if (ok) elems_[i].inv = id;
    }
  }
  completed_length_ = top + 1;
  if (!grew) finite_complete_ = true;
}

void Group::ensure_length(int len) {
  std::unique_lock lock(reg_mtx_);
  while (completed_length_ < len && !finite_complete_) grow_one_layer_locked();
}

int Group::length(uint32_t id) {
  std::shared_lock lock(reg_mtx_);
  return elems_[id].length;
}

Word Group::shortlex(uint32_t id) {
  std::shared_lock lock(reg_mtx_);
  return elems_[id].shortlex;
}

const IntMatrix& Group::matrix(uint32_t id) {
  std::shared_lock lock(reg_mtx_);
  return elems_[id].mat;  // deque entries are stable
}

uint32_t Group::inverse(uint32_t id) {
  {
    std::shared_lock lock(reg_mtx_);
    if (elems_[id].inv != UINT32_MAX) return elems_[id].inv;
  }
  ensure_length(length(id) + 1);
  std::shared_lock lock(reg_mtx_);
  if (elems_[id].inv == UINT32_MAX) throw TheoryError("inverse not resolved");
  return elems_[id].inv;
}

uint32_t Group::mul_gen(uint32_t id, int s) {
  {
    std::shared_lock lock(reg_mtx_);
    int32_t r = elems_[id].right[s];
    if (r >= 0) return static_cast<uint32_t>(r);
  }
  ensure_length(length(id) + 1);
  std::shared_lock lock(reg_mtx_);
  int32_t r = elems_[id].right[s];
  if (r < 0) throw TheoryError("right product not resolved");
  return static_cast<uint32_t>(r);
}

uint32_t Group::mul_gen_left(int s, uint32_t id) {
  {
    std::shared_lock lock(reg_mtx_);
    int32_t r = elems_[id].left[s];
    if (r >= 0) return static_cast<uint32_t>(r);
  }
  ensure_length(length(id) + 1);
  std::shared_lock lock(reg_mtx_);
  int32_t r = elems_[id].left[s];
  if (r < 0) throw TheoryError("left product not resolved");
  return static_cast<uint32_t>(r);
}

uint32_t Group::mul(uint32_t a, uint32_t b) {
  uint32_t r = a;
  Word w = shortlex(b);
  for (int s : w) r = mul_gen(r, s);
  return r;
}

bool Group::has_right_descent(uint32_t id, int s) {
  uint32_t p = mul_gen(id, s);
  return length(p) < length(id);
}

Element Group::element_of(const Word& w) {
  for (int s : w)
    if (s < 0 || s >= rank()) throw ConfigError("word letter out of range");
  uint32_t id = 0;
  for (int s : w) id = mul_gen(id, s);
  return Element(this, id);
}

Element Group::generator(int s) { return element_of({s}); }

bool Group::bruhat_leq(Element x, Element y) {
  if (x.group() != this || y.group() != this) throw TheoryError("bruhat_leq: datum mismatch");
  uint32_t xi = x.id(), yi = y.id();
  while (true) {
    if (length(yi) == 0) return length(xi) == 0;
    if (length(xi) > length(yi)) return false;
    int s = shortlex(yi).back();
    uint32_t ys = mul_gen(yi, s);  // shorter
    uint32_t xs = mul_gen(xi, s);
    if (length(xs) < length(xi)) xi = xs;
    yi = ys;
  }
}

std::vector<Element> Group::elements_up_to_length(int len) {
  ensure_length(len + 1);
  std::vector<Element> out;
  {
    std::shared_lock lock(reg_mtx_);
    for (uint32_t i = 0; i < elems_.size(); ++i)
      if (elems_[i].length <= len) out.emplace_back(this, i);
  }
  std::sort(out.begin(), out.end(), [&](Element a, Element b) {
    if (a.length() != b.length()) return a.length() < b.length();
    return a.shortlex_word() < b.shortlex_word();
  });
  return out;
}

std::vector<Element> Group::bruhat_ideal(Element top) {
  std::vector<Element> all = elements_up_to_length(top.length());
  std::vector<Element> out;
  for (Element e : all)
    if (bruhat_leq(e, top)) out.push_back(e);
  // Closure check: every u <= v in the ideal stays inside (trivially true;
  // verify transitively against the full length-bounded set).
  for (Element e : out)
    for (Element u : all)
      if (bruhat_leq(u, e) && std::find(out.begin(), out.end(), u) == out.end())
        throw TheoryError("bruhat_ideal not closed under <=");
  return out;
}

Word apply_braid_move(const Word& w, const BraidMove& mv) {
  Word out = w;
  for (int k = 0; k < mv.m; ++k) out[mv.pos + k] = (k % 2 == 0) ? mv.r : mv.s;
  return out;
}

namespace {
// All braid moves applicable to w, in the deterministic (position, pair) order.
std::vector<BraidMove> moves_of(const CoxeterDatum& d, const Word& w) {
  std::vector<BraidMove> out;
  for (int pos = 0; pos < static_cast<int>(w.size()); ++pos) {
    int s = w[pos];
    if (pos + 1 >= static_cast<int>(w.size())) continue;
    int r = w[pos + 1];
    if (r == s) continue;
    int m = d.coxeter_m(s, r);
    if (m == 0 || pos + m > static_cast<int>(w.size())) continue;
    bool match = true;
    for (int k = 0; k < m; ++k)
      if (w[pos + k] != ((k % 2 == 0) ? s : r)) { match = false; break; }
    if (match) out.push_back({pos, s, r, m});
  }
  return out;
}
}  // namespace

std::shared_ptr<const GreGraph> Group::gre_graph(Element x) {
  std::lock_guard lock(comb_mtx_);
  auto it = gre_cache_.find(x.id());
  if (it != gre_cache_.end()) return it->second;
  auto g = std::make_shared<GreGraph>();
  Word start = shortlex(x.id());
  g->nodes.push_back(start);
  g->index.emplace(start, 0);
  std::queue<int> q;
  q.push(0);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    Word w = g->nodes[u];
    for (const BraidMove& mv : moves_of(datum_, w)) {
      Word v = apply_braid_move(w, mv);
      auto [jt, fresh] = g->index.try_emplace(v, static_cast<int>(g->nodes.size()));
      if (fresh) {
        g->nodes.push_back(v);
        q.push(jt->second);
      }
      if (u < jt->second) g->edges.push_back({u, jt->second, mv});
    }
  }
  auto res = std::shared_ptr<const GreGraph>(std::move(g));
  gre_cache_.emplace(x.id(), res);
  return res;
}

namespace {
// Deterministic BFS through reduced words by braid moves.  Expansion order is
// (position, pair) per node, nodes processed FIFO; the first node satisfying
// `accept` wins, ties broken by discovery order.  Returns the move list.
std::optional<std::vector<BraidMove>> braid_bfs(const CoxeterDatum& d, const Word& start,
                                                const std::function<bool(const Word&)>& accept) {
  std::map<Word, std::pair<Word, BraidMove>> parent;  // child -> (parent word, move)
  std::vector<Word> order{start};
  std::map<Word, bool> seen{{start, true}};
  size_t qi = 0;
  while (qi < order.size()) {
    Word w = order[qi++];
    if (accept(w)) {
      std::vector<BraidMove> path;
      Word cur = w;
      while (cur != start) {
        auto& [pw, mv] = parent.at(cur);
        path.push_back(mv);
        cur = pw;
      }
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (const BraidMove& mv : moves_of(d, w)) {
      Word v = apply_braid_move(w, mv);
      if (seen.emplace(v, true).second) {
        parent.emplace(v, std::make_pair(w, mv));
        order.push_back(v);
      }
    }
  }
  return std::nullopt;
}
}  // namespace

std::vector<BraidMove> Group::braid_path(const Word& w, int s) {
  Element x = element_of(w);
  if (static_cast<int>(w.size()) != x.length()) throw TheoryError("braid_path: word not reduced");
  if (!has_right_descent(x.id(), s))
    throw TheoryError("braid_path: precondition l(xs) < l(x) violated");
  std::lock_guard lock(comb_mtx_);
  auto key = std::make_pair(w, s);
  auto it = path_cache_.find(key);
  if (it != path_cache_.end()) return it->second;
  auto path = braid_bfs(datum_, w, [&](const Word& u) { return !u.empty() && u.back() == s; });
  if (!path) throw TheoryError("braid_path: no reduced word ending in requested letter");
  path_cache_.emplace(key, *path);
  return *path;
}

Word Group::canonical_word(Element x) {
  {
    std::lock_guard lock(comb_mtx_);
    auto it = canon_cache_.find(x.id());
    if (it != canon_cache_.end()) return it->second;
  }
  Word result;
  bool fallback = false;
  uint32_t inv = inverse(x.id());
  if (inv == x.id()) {
    // Involution: ShortLex-minimal palindromic reduced word, if one exists.
    auto graph = gre_graph(x);
    std::optional<Word> best;
    for (const Word& w : graph->nodes) {
      Word r(w.rbegin(), w.rend());
      if (r == w && (!best || w < *best)) best = w;
    }
    if (best) {
      result = *best;
    } else {
      result = shortlex(x.id());
      fallback = true;
    }
  } else {
    Word mine = shortlex(x.id());
    Word theirs = shortlex(inv);
    if (mine < theirs) {
      result = mine;
    } else {
      result.assign(theirs.rbegin(), theirs.rend());
    }
  }
  std::lock_guard lock(comb_mtx_);
  canon_cache_.emplace(x.id(), result);
  palindrome_fallback_.emplace(x.id(), fallback);
  return result;
}

bool Group::palindrome_fallback(Element x) {
  canonical_word(x);
  std::lock_guard lock(comb_mtx_);
  return palindrome_fallback_.at(x.id());
}

std::vector<Element> Group::palindrome_fallbacks_up_to(int len) {
  std::vector<Element> out;
  for (Element e : elements_up_to_length(len))
    if (palindrome_fallback(e)) out.push_back(e);
  return out;
}

std::vector<BraidMove> Group::path_to_canonical(const Word& w) {
  Element x = element_of(w);
  if (static_cast<int>(w.size()) != x.length())
    throw TheoryError("path_to_canonical: word not reduced");
  Word target = canonical_word(x);
  std::lock_guard lock(comb_mtx_);
  auto it = canon_path_cache_.find(w);
  if (it != canon_path_cache_.end()) return it->second;
  auto path = braid_bfs(datum_, w, [&](const Word& u) { return u == target; });
  if (!path) throw TheoryError("reduced-expression graph is not connected");
  canon_path_cache_.emplace(w, *path);
  return *path;
}

bool Group::is_reflection(Element x) {
  {
    std::lock_guard lock(comb_mtx_);
    auto it = reflection_cache_.find(x.id());
    if (it != reflection_cache_.end()) return it->second;
  }
  int len = x.length();
  bool res = false;
  if (len % 2 == 1) {
    // Conjugates w s w^{-1} with l(w) <= (len-1)/2 cover every reflection of
    // length <= len.
    int bound = (len - 1) / 2;
    for (Element w : elements_up_to_length(bound)) {
      for (int s = 0; s < rank() && !res; ++s) {
        uint32_t c = mul(mul_gen(w.id(), s), inverse(w.id()));
        if (c == x.id()) res = true;
      }
      if (res) break;
    }
  }
  std::lock_guard lock(comb_mtx_);
  reflection_cache_.emplace(x.id(), res);
  return res;
}

}  // namespace soergel
