#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sera {

/// A point in R^q. Dimension is carried by the container size.
using Point = std::vector<double>;

/// Raised when an input file or run configuration is unusable.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a parse fails; carries the offending line number.
class io_error : public std::runtime_error {
 public:
  io_error(const std::string& msg, long line = -1)
      : std::runtime_error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Raised when recovered cluster geometry contradicts the (mu, eta, n)
/// contract; the message names the offending clusters.
class recovery_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline double sup_norm(const Point& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::fabs(v));
  return m;
}

inline double sup_dist(const Point& a, const Point& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

inline double norm2_sq(const Point& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

inline double norm2(const Point& a) { return std::sqrt(norm2_sq(a)); }

inline double dist2_sq(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double dist2(const Point& a, const Point& b) { return std::sqrt(dist2_sq(a, b)); }

inline double dot(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Strict lexicographic order on coordinate vectors; the tie-break rule
/// used everywhere a deterministic choice between points is needed.
inline bool lex_less(const Point& a, const Point& b) {
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return a.size() < b.size();
}

inline constexpr double pi_v = 3.14159265358979323846;

}  // namespace sera
