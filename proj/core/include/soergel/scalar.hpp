#pragma once

#include <gmpxx.h>

#include <concepts>
#include <cstdint>
#include <optional>
#include <string>

#include "soergel/error.hpp"

namespace soergel {

// Exact rational number.  This is the coefficient field used for every
// characteristic-zero computation; 2-adic and p-adic integrality of results
// is asserted after the fact, never assumed.
class Rational {
 public:
  Rational() : v_(0) {}
  Rational(long n) : v_(n) {}  // NOLINT: implicit by design, mirrors int literals
  Rational(long num, long den) : v_(num, den) {
    if (den == 0) throw TheoryError("rational with zero denominator");
    v_.canonicalize();
  }
  explicit Rational(const mpq_class& q) : v_(q) { v_.canonicalize(); }

  static long characteristic() { return 0; }
  static Rational from_int(long n) { return Rational(n); }

  bool is_zero() const { return sgn(v_) == 0; }
  bool is_one() const { return v_ == 1; }

  Rational operator-() const { return Rational(mpq_class(-v_)); }
  Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
  Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
  Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
  Rational& operator/=(const Rational& o) {
    if (o.is_zero()) throw TheoryError("division by zero rational");
    v_ /= o.v_;
    return *this;
  }
  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
  friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Rational& a, const Rational& b) { return a.v_ != b.v_; }

  Rational inverse() const {
    if (is_zero()) throw TheoryError("inverse of zero");
    return Rational(mpq_class(1) / v_);
  }

  mpz_class numerator() const { return v_.get_num(); }
  mpz_class denominator() const { return v_.get_den(); }
  bool is_integer() const { return v_.get_den() == 1; }

  // True when the denominator is 1, 2, 4, 8, ...  (a unit of Z[1/2]).
  bool denominator_is_power_of_two() const {
    mpz_class d = v_.get_den();
    return mpz_scan1(d.get_mpz_t(), 0) == mpz_sizeinbase(d.get_mpz_t(), 2) - 1;
  }

  // p does not divide the denominator.
  bool is_p_integral(long p) const {
    return !mpz_divisible_ui_p(v_.get_den().get_mpz_t(), static_cast<unsigned long>(p));
  }

  std::string str() const { return v_.get_str(); }
  static std::optional<Rational> parse(const std::string& s) {
    mpq_class q;
    if (q.set_str(s, 10) != 0) return std::nullopt;
    q.canonicalize();
    return Rational(q);
  }

  const mpq_class& raw() const { return v_; }

 private:
  mpq_class v_;
};

// Prime field F_p with p an odd prime.  The modulus is process-global: it is
// fixed before a mod-p computation starts and stays constant while worker
// threads run, matching how the CLI drives characteristic-p jobs.
class Fp {
 public:
  Fp() : v_(0) {}
  Fp(long n) : v_(reduce(n)) {}  // NOLINT: implicit, mirrors int literals

  static void set_modulus(long p);
  static long modulus();
  static long characteristic() { return modulus(); }
  static Fp from_int(long n) { return Fp(n); }

  // RAII scope for tests that switch between several primes.
  class ModulusScope {
   public:
    explicit ModulusScope(long p) : saved_(raw_modulus()) { set_modulus(p); }
    ~ModulusScope() { raw_modulus() = saved_; }
    ModulusScope(const ModulusScope&) = delete;
    ModulusScope& operator=(const ModulusScope&) = delete;

   private:
    long saved_;
  };

  bool is_zero() const { return v_ == 0; }
  bool is_one() const { return v_ == 1; }

  Fp operator-() const { return v_ == 0 ? Fp() : wrap(modulus() - v_); }
  Fp& operator+=(const Fp& o) { v_ = (v_ + o.v_) % modulus(); return *this; }
  Fp& operator-=(const Fp& o) { v_ = (v_ - o.v_ % modulus() + modulus()) % modulus(); return *this; }
  Fp& operator*=(const Fp& o) { v_ = mulmod(v_, o.v_); return *this; }
  Fp& operator/=(const Fp& o) { return *this *= o.inverse(); }
  friend Fp operator+(Fp a, const Fp& b) { return a += b; }
  friend Fp operator-(Fp a, const Fp& b) { return a -= b; }
  friend Fp operator*(Fp a, const Fp& b) { return a *= b; }
  friend Fp operator/(Fp a, const Fp& b) { return a /= b; }
  friend bool operator==(const Fp& a, const Fp& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Fp& a, const Fp& b) { return a.v_ != b.v_; }

  Fp inverse() const;

  long value() const { return v_; }
  std::string str() const { return std::to_string(v_); }
  static std::optional<Fp> parse(const std::string& s) {
    try {
      size_t pos = 0;
      long n = std::stol(s, &pos);
      if (pos != s.size()) return std::nullopt;
      return Fp(n);
    } catch (...) {
      return std::nullopt;
    }
  }

 private:
  static long& raw_modulus();
  static long reduce(long n) {
    long p = modulus();
    long r = n % p;
    return r < 0 ? r + p : r;
  }
  static Fp wrap(long canonical) {
    Fp f;
    f.v_ = canonical;
    return f;
  }
  long mulmod(long a, long b) const {
    return static_cast<long>(static_cast<__int128>(a) * b % modulus());
  }

  long v_;
};

template <class K>
concept ScalarField = requires(K a, K b, long n, const std::string& s) {
  { K() } -> std::same_as<K>;
  { K::from_int(n) } -> std::same_as<K>;
  { K::characteristic() } -> std::same_as<long>;
  { a.is_zero() } -> std::same_as<bool>;
  { a.is_one() } -> std::same_as<bool>;
  { -a } -> std::same_as<K>;
  { a + b } -> std::same_as<K>;
  { a - b } -> std::same_as<K>;
  { a * b } -> std::same_as<K>;
  { a / b } -> std::same_as<K>;
  { a.inverse() } -> std::same_as<K>;
  { a == b } -> std::same_as<bool>;
  { a.str() } -> std::same_as<std::string>;
  { K::parse(s) } -> std::same_as<std::optional<K>>;
};

static_assert(ScalarField<Rational>);
static_assert(ScalarField<Fp>);

// Maps a rational into F_p when its denominator is prime to p.
std::optional<Fp> reduce_mod(const Rational& q, long p);

}  // namespace soergel
