#include "soergel/scalar.hpp"

namespace soergel {

long& Fp::raw_modulus() {
  static long p = 0;
  return p;
}

void Fp::set_modulus(long p) {
  if (p < 3 || p % 2 == 0) throw ConfigError("F_p requires an odd prime, got " + std::to_string(p));
  for (long d = 3; d * d <= p; d += 2)
    if (p % d == 0) throw ConfigError("F_p modulus " + std::to_string(p) + " is not prime");
  raw_modulus() = p;
}

long Fp::modulus() {
  long p = raw_modulus();
  if (p == 0) throw TheoryError("F_p used before set_modulus");
  return p;
}

Fp Fp::inverse() const {
  if (v_ == 0) throw TheoryError("inverse of zero in F_p");
  // extended Euclid
  long a = v_, b = modulus(), x0 = 1, x1 = 0;
  while (b != 0) {
    long q = a / b;
    long t = a - q * b;
    a = b;
    b = t;
    t = x0 - q * x1;
    x0 = x1;
    x1 = t;
  }
  return Fp(x0);
}

std::optional<Fp> reduce_mod(const Rational& q, long p) {
  if (Fp::modulus() != p) throw TheoryError("reduce_mod: F_p modulus is not set to p");
  if (!q.is_p_integral(p)) return std::nullopt;
  mpz_class num = q.numerator() % p;
  mpz_class den = q.denominator() % p;
  Fp n(num.get_si());
  Fp d(den.get_si());
  return n / d;
}

}  // namespace soergel
