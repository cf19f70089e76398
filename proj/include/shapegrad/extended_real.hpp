#pragma once

#include <limits>
#include <stdexcept>

namespace shapegrad {

// Value on R u {+inf}. Conjugates of indicator-type integrands take the
// value +inf, and dual energies must propagate it exactly rather than
// through a sentinel float.
class ExtendedReal {
 public:
  ExtendedReal() = default;
  ExtendedReal(double v) : value_(v) {}  // NOLINT: implicit by design

  static ExtendedReal infinity() {
    ExtendedReal r;
    r.infinite_ = true;
    return r;
  }

  bool is_finite() const { return !infinite_; }

  double value() const {
    if (infinite_) throw std::logic_error("ExtendedReal: value() on +inf");
    return value_;
  }

  // Finite value, or +inf when infinite; for reporting only.
  double value_or_inf() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  ExtendedReal& operator+=(const ExtendedReal& o) {
    infinite_ = infinite_ || o.infinite_;
    if (!infinite_) value_ += o.value_;
    return *this;
  }

  friend ExtendedReal operator+(ExtendedReal a, const ExtendedReal& b) { return a += b; }

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }

  friend bool operator<(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.infinite_) return false;
    if (b.infinite_) return true;
    return a.value_ < b.value_;
  }

  friend bool operator<=(const ExtendedReal& a, const ExtendedReal& b) {
    return a < b || a == b;
  }
  friend bool operator>(const ExtendedReal& a, const ExtendedReal& b) { return b < a; }
  friend bool operator>=(const ExtendedReal& a, const ExtendedReal& b) { return b <= a; }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

}  // namespace shapegrad
