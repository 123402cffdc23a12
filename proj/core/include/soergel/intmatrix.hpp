#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "soergel/error.hpp"

namespace soergel {

// Square integer matrix, row-major.  Carries the action of group elements on
// V* in the basis of simple roots; entries stay small at the scales this
// engine targets, but products are overflow-checked anyway.
class IntMatrix {
 public:
  IntMatrix() : n_(0) {}
  explicit IntMatrix(int n) : n_(n), a_(static_cast<size_t>(n) * n, 0) {}

  static IntMatrix identity(int n) {
    IntMatrix m(n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  int dim() const { return n_; }
  long long& at(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
  long long at(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }

  IntMatrix operator*(const IntMatrix& o) const {
    if (n_ != o.n_) throw TheoryError("IntMatrix dimension mismatch");
    IntMatrix r(n_);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k) {
        long long v = at(i, k);
        if (v == 0) continue;
        for (int j = 0; j < n_; ++j) {
          long long t;
          if (__builtin_mul_overflow(v, o.at(k, j), &t) ||
              __builtin_add_overflow(r.at(i, j), t, &t))
            throw TheoryError("IntMatrix overflow");
          r.at(i, j) = t;
        }
      }
    return r;
  }

  bool operator==(const IntMatrix& o) const { return n_ == o.n_ && a_ == o.a_; }
  bool operator!=(const IntMatrix& o) const { return !(*this == o); }

  IntMatrix operator-(const IntMatrix& o) const {
    if (n_ != o.n_) throw TheoryError("IntMatrix dimension mismatch");
    IntMatrix r(n_);
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] - o.a_[i];
    return r;
  }

  // Stable byte string, usable as a hash-map key.
  std::string key() const {
    std::string s;
    s.reserve(a_.size() * sizeof(long long));
    for (long long v : a_) s.append(reinterpret_cast<const char*>(&v), sizeof v);
    return s;
  }

 private:
  int n_;
  std::vector<long long> a_;
};

}  // namespace soergel
