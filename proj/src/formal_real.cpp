#include "latspec/formal_real.hpp"

#include <cctype>

namespace latspec {

FormalReal FormalReal::symbol(const std::string& name, Rational coefficient) {
  if (name.empty()) throw Error("empty symbol name");
  FormalReal f;
  if (coefficient != 0) f.coeffs_.emplace(name, std::move(coefficient));
  return f;
}

Rational FormalReal::coefficient(const std::string& name) const {
  auto it = coeffs_.find(name);
  return it == coeffs_.end() ? Rational(0) : it->second;
}

FormalReal& FormalReal::operator+=(const FormalReal& other) {
  rational_ += other.rational_;
  for (const auto& [name, c] : other.coeffs_) {
    auto& slot = coeffs_[name];
    slot += c;
    if (slot == 0) coeffs_.erase(name);
  }
  return *this;
}

FormalReal& FormalReal::operator-=(const FormalReal& other) {
  FormalReal neg = other;
  neg *= Rational(-1);
  return *this += neg;
}

FormalReal& FormalReal::operator*=(const Rational& scalar) {
  rational_ *= scalar;
  if (scalar == 0) {
    coeffs_.clear();
    return *this;
  }
  for (auto& [name, c] : coeffs_) c *= scalar;
  return *this;
}

double FormalReal::evaluate(const std::map<std::string, double>& values) const {
  double v = rational_.get_d();
  for (const auto& [name, c] : coeffs_) {
    auto it = values.find(name);
    if (it == values.end()) throw Error("no numeric value for symbol '" + name + "'");
    v += c.get_d() * it->second;
  }
  return v;
}

std::string FormalReal::to_string() const {
  std::string out;
  if (rational_ != 0 || coeffs_.empty()) out = rational_.get_str();
  for (const auto& [name, c] : coeffs_) {
    const bool negative = c < 0;
    Rational mag = negative ? Rational(-c) : c;
    if (!out.empty()) out += negative ? " - " : " + ";
    else if (negative) out += "-";
    if (mag != 1) out += mag.get_str() + "*";
    out += name;
  }
  return out;
}

namespace {

bool is_symbol_char(char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_'; }

}  // namespace

FormalReal FormalReal::parse(const std::string& text) {
  FormalReal total;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto skip = [&] {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  bool first = true;
  for (;;) {
    skip();
    if (i >= n) {
      if (first) throw Error("empty formal real");
      break;
    }
    int sign = 1;
    if (text[i] == '+' || text[i] == '-') {
      sign = text[i] == '-' ? -1 : 1;
      ++i;
      skip();
    } else if (!first) {
      throw Error("expected '+' or '-' in '" + text + "'");
    }
    first = false;
    Rational coeff = 1;
    bool have_number = false;
    if (i < n && (std::isdigit(static_cast<unsigned char>(text[i])))) {
      std::size_t j = i;
      while (j < n && (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '/')) ++j;
      coeff = parse_rational(text.substr(i, j - i));
      i = j;
      have_number = true;
      skip();
      if (i < n && text[i] == '*') {
        ++i;
        skip();
      }
    }
    std::string name;
    if (i < n && std::isalpha(static_cast<unsigned char>(text[i]))) {
      while (i < n && is_symbol_char(text[i])) name += text[i++];
    }
    if (!have_number && name.empty()) throw Error("malformed term in '" + text + "'");
    coeff *= sign;
    if (name.empty()) total += FormalReal(coeff);
    else total += FormalReal::symbol(name, coeff);
  }
  return total;
}

}  // namespace latspec
