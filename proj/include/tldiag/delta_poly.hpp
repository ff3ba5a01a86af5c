#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tldiag/errors.hpp"

namespace tldiag {

// Element of Z[delta] with exact integer coefficients, indexed by exponent.
// Invariant: no trailing zero coefficients.
class DeltaPoly {
 public:
  DeltaPoly() = default;
  explicit DeltaPoly(long long c) {
    if (c != 0) coeffs_.push_back(c);
  }
  static DeltaPoly delta(int power = 1, long long c = 1) {
    DeltaPoly p;
    if (c != 0) {
      p.coeffs_.assign(power + 1, 0);
      p.coeffs_[power] = c;
    }
    return p;
  }
  static DeltaPoly from_coeffs(std::vector<long long> cs) {
    DeltaPoly p;
    p.coeffs_ = std::move(cs);
    p.trim();
    return p;
  }

  const std::vector<long long>& coeffs() const { return coeffs_; }
  bool is_zero() const { return coeffs_.empty(); }
  bool is_one() const { return coeffs_.size() == 1 && coeffs_[0] == 1; }
  long long coeff(size_t k) const { return k < coeffs_.size() ? coeffs_[k] : 0; }
  int degree() const { return (int)coeffs_.size() - 1; }

  DeltaPoly& operator+=(const DeltaPoly& o) {
    if (coeffs_.size() < o.coeffs_.size()) coeffs_.resize(o.coeffs_.size(), 0);
    for (size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    trim();
    return *this;
  }
  DeltaPoly& operator-=(const DeltaPoly& o) {
    if (coeffs_.size() < o.coeffs_.size()) coeffs_.resize(o.coeffs_.size(), 0);
    for (size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    trim();
    return *this;
  }
  friend DeltaPoly operator+(DeltaPoly a, const DeltaPoly& b) { return a += b; }
  friend DeltaPoly operator-(DeltaPoly a, const DeltaPoly& b) { return a -= b; }
  friend DeltaPoly operator*(const DeltaPoly& a, const DeltaPoly& b) {
    if (a.is_zero() || b.is_zero()) return DeltaPoly();
    std::vector<long long> out(a.coeffs_.size() + b.coeffs_.size() - 1, 0);
    for (size_t i = 0; i < a.coeffs_.size(); ++i)
      for (size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return from_coeffs(std::move(out));
  }
  DeltaPoly& operator*=(const DeltaPoly& o) { return *this = *this * o; }
  DeltaPoly& mul_scalar(long long c) {
    for (auto& x : coeffs_) x *= c;
    trim();
    return *this;
  }
  DeltaPoly& mul_delta(int power = 1) {
    if (!coeffs_.empty()) coeffs_.insert(coeffs_.begin(), power, 0);
    return *this;
  }

  bool operator==(const DeltaPoly& o) const { return coeffs_ == o.coeffs_; }
  bool operator!=(const DeltaPoly& o) const { return !(*this == o); }

  std::string to_string() const {
    if (coeffs_.empty()) return "0";
    std::string s;
    for (size_t i = 0; i < coeffs_.size(); ++i) {
      if (coeffs_[i] == 0) continue;
      if (!s.empty()) s += coeffs_[i] > 0 ? "+" : "";
      if (i == 0) {
        s += std::to_string(coeffs_[i]);
      } else {
        if (coeffs_[i] == -1) s += "-";
        else if (coeffs_[i] != 1) s += std::to_string(coeffs_[i]) + "*";
        s += "d";
        if (i > 1) s += "^" + std::to_string(i);
      }
    }
    return s;
  }

 private:
  void trim() {
    while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
  }
  std::vector<long long> coeffs_;
};

}  // namespace tldiag
