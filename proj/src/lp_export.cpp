#include <cctype>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "cttl/lp.hpp"

namespace cttl::lp {

namespace {

// LP-format identifiers must avoid operators and may not start with a digit
// or the letter e followed by a digit.
std::string sanitize(const std::string& name, int fallback_id) {
  std::string out;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')
      out += c;
    else
      out += '_';
  }
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0])))
    out = "v" + std::to_string(fallback_id) + "_" + out;
  return out;
}

void write_terms(std::ostream& os, const LinearProgram& lp,
                 const std::vector<LinearProgram::Term>& terms) {
  bool first = true;
  for (const auto& t : terms) {
    const double c = t.coef;
    if (c == 0.0) continue;
    if (first) {
      if (c < 0) os << "- ";
      first = false;
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    const double a = std::abs(c);
    if (a != 1.0) os << a << " ";
    os << sanitize(lp.var_names[static_cast<size_t>(t.var)], t.var);
  }
  if (first) os << "0 " << sanitize(lp.var_names[0], 0);
}

}  // namespace

void write_lp_format(const LinearProgram& lp, std::ostream& os) {
  os << "\\ generated by cttl\n";
  os << "Minimize\n obj: ";
  std::vector<LinearProgram::Term> obj;
  for (int v = 0; v < lp.n_vars(); ++v)
    if (lp.cost[static_cast<size_t>(v)] != 0.0)
      obj.push_back({v, lp.cost[static_cast<size_t>(v)]});
  write_terms(os, lp, obj);
  if (lp.objective_offset != 0.0) {
    os << (lp.objective_offset < 0 ? " - " : " + ")
       << std::abs(lp.objective_offset);
  }
  os << "\nSubject To\n";
  for (int r = 0; r < lp.n_rows(); ++r) {
    const auto& row = lp.rows[static_cast<size_t>(r)];
    os << " " << sanitize(row.name, r) << ": ";
    write_terms(os, lp, row.terms);
    switch (row.sense) {
      case Sense::Le:
        os << " <= ";
        break;
      case Sense::Ge:
        os << " >= ";
        break;
      case Sense::Eq:
        os << " = ";
        break;
    }
    os << row.rhs << "\n";
  }
  os << "Bounds\n";
  for (int v = 0; v < lp.n_vars(); ++v) {
    const double lo = lp.lower[static_cast<size_t>(v)];
    const double up = lp.upper[static_cast<size_t>(v)];
    const std::string name = sanitize(lp.var_names[static_cast<size_t>(v)], v);
    if (!std::isfinite(lo) && !std::isfinite(up)) {
      os << " " << name << " free\n";
    } else if (!std::isfinite(up)) {
      os << " " << name << " >= " << lo << "\n";
    } else if (!std::isfinite(lo)) {
      os << " -inf <= " << name << " <= " << up << "\n";
    } else {
      os << " " << lo << " <= " << name << " <= " << up << "\n";
    }
  }
  bool any_int = false;
  for (int v = 0; v < lp.n_vars(); ++v) {
    if (!lp.is_integer[static_cast<size_t>(v)]) continue;
    if (!any_int) {
      os << "Generals\n";
      any_int = true;
    }
    os << " " << sanitize(lp.var_names[static_cast<size_t>(v)], v) << "\n";
  }
  os << "End\n";
}

}  // namespace cttl::lp
