#include <cmath>
#include <cstdio>
#include <sstream>

#include "flrw/errors.hpp"
#include "flrw/extended_real.hpp"

namespace flrw {

namespace {
std::string join_lines(const std::vector<std::string>& items, const char* head) {
  std::ostringstream os;
  os << head;
  for (const auto& s : items) os << "\n  - " << s;
  return os.str();
}
}  // namespace

HypothesisError::HypothesisError(std::vector<std::string> violations)
    : Error(join_lines(violations, "hypothesis violated:")), violations_(std::move(violations)) {}

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error(join_lines(problems, "invalid configuration:")), problems_(std::move(problems)) {}

ExtendedReal ExtendedReal::from_double(double v) {
  if (std::isinf(v) && v > 0) return infinity();
  if (!std::isfinite(v)) throw DomainError("extended real must be finite or +inf, got " + format_double(v));
  return ExtendedReal(v);
}

ExtendedReal ExtendedReal::parse(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  s = s.substr(b);
  if (s == "inf" || s == "+inf" || s == "infinity" || s == "Inf") return infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw DomainError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw DomainError("trailing characters in number: '" + s + "'");
  return from_double(v);
}

double ExtendedReal::value() const {
  if (!finite_) throw DomainError("value() on an infinite extended real");
  return value_;
}

double ExtendedReal::as_double() const { return finite_ ? value_ : HUGE_VAL; }

std::string ExtendedReal::to_string() const { return finite_ ? format_double(value_) : "inf"; }

bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
  if (a.finite_ != b.finite_) return false;
  return !a.finite_ || a.value_ == b.value_;
}

std::partial_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b) {
  if (!a.finite_ && !b.finite_) return std::partial_ordering::equivalent;
  if (!a.finite_) return std::partial_ordering::greater;
  if (!b.finite_) return std::partial_ordering::less;
  return a.value_ <=> b.value_;
}

ExtendedReal min(const ExtendedReal& a, const ExtendedReal& b) { return (b < a) ? b : a; }
ExtendedReal max(const ExtendedReal& a, const ExtendedReal& b) { return (a < b) ? b : a; }

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace flrw
