#include "iamod/lp_mps.hpp"

#include "iamod/error.hpp"
#include "text_io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace iamod::lp {

namespace {

constexpr std::size_t kNameWidth = 8;
constexpr std::size_t kNumberWidth = 12;

std::string sanitize(std::string_view raw) {
  std::string s;
  for (const char c : raw.substr(0, kNameWidth)) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '.' || c == '-';
    s.push_back(ok ? c : '_');
  }
  if (s.empty()) s = "_";
  return s;
}

std::string base36(std::size_t k) {
  static constexpr std::string_view digits = "0123456789abcdefghijklmnopqrstuvwxyz";
  std::string out;
  do {
    out.insert(out.begin(), digits[k % 36]);
    k /= 36;
  } while (k > 0);
  return out;
}

std::vector<std::string> assign_names(std::size_t count,
                                      const std::function<std::string(std::size_t)>& raw_name,
                                      char default_prefix, std::unordered_set<std::string> taken,
                                      bool resolve) {
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string raw = raw_name(i);
    if (raw.empty()) raw = fmt::format("{}{}", default_prefix, i);
    const std::string base = sanitize(raw);
    std::string name = base;
    if (taken.contains(name)) {
      if (!resolve)
        throw Error(ErrorCode::NameCollisionAfterSanitize,
                    fmt::format("'{}' maps to '{}', which is already used", raw, base));
      for (std::size_t k = 1;; ++k) {
        const std::string suffix = "~" + base36(k);
        if (suffix.size() >= kNameWidth)
          throw Error(ErrorCode::NameCollisionAfterSanitize, "suffix space exhausted for '" + raw + "'");
        name = base.substr(0, std::min(base.size(), kNameWidth - suffix.size())) + suffix;
        if (!taken.contains(name)) break;
      }
    }
    taken.insert(name);
    out.push_back(std::move(name));
  }
  return out;
}

std::string field_line(std::string_view f1, std::string_view f2, std::string_view f3,
                       std::string_view f4) {
  std::string line = fmt::format(" {:<2} {:<8}  {:<8}  {:<12}", f1, f2, f3, f4);
  while (!line.empty() && line.back() == ' ') line.pop_back();
  line.push_back('\n');
  return line;
}

std::vector<std::string> tokens(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

std::string format_mps_number(double value) {
  if (value == 0.0) return "0";
  std::string s = fmt::format("{}", value);
  if (s.size() <= kNumberWidth) return s;
  for (int precision = 17; precision >= 1; --precision) {
    s = fmt::format("{:.{}g}", value, precision);
    if (s.size() <= kNumberWidth) return s;
  }
  return s;
}

MpsNames mps_names(const LpModel& model, const MpsOptions& options) {
  MpsNames names;
  names.columns = assign_names(
      static_cast<std::size_t>(model.num_vars()),
      [&](std::size_t j) { return model.var_name(static_cast<Eigen::Index>(j)); }, 'C', {},
      options.resolve_collisions);
  names.rows = assign_names(
      model.num_rows(), [&](std::size_t i) { return model.row(i).name; }, 'R',
      {std::string(kMpsObjectiveRow)}, options.resolve_collisions);
  return names;
}

std::string export_mps(const LpModel& model, const MpsOptions& options) {
  model.validate();
  const MpsNames names = mps_names(model, options);
  const auto n = static_cast<std::size_t>(model.num_vars());

  std::vector<std::vector<std::pair<std::size_t, double>>> columns(n);
  for (std::size_t i = 0; i < model.num_rows(); ++i)
    for (const auto& t : model.row(i).terms)
      columns[static_cast<std::size_t>(t.col)].emplace_back(i, t.coef);

  std::string out = options.comment.empty() ? std::string() : fmt::format("* {}\n", options.comment);
  out += fmt::format("NAME          {}\nROWS\n", sanitize(options.problem_name));
  out += field_line("N", kMpsObjectiveRow, "", "");
  for (std::size_t i = 0; i < model.num_rows(); ++i) {
    const char* type = "E";
    if (model.row(i).relation == Relation::LessEqual) type = "L";
    if (model.row(i).relation == Relation::GreaterEqual) type = "G";
    out += field_line(type, names.rows[i], "", "");
  }

  out += "COLUMNS\n";
  for (std::size_t j = 0; j < n; ++j) {
    const double c = model.objective()[static_cast<Eigen::Index>(j)];
    bool wrote = false;
    if (c != 0.0) {
      out += field_line("", names.columns[j], kMpsObjectiveRow, format_mps_number(c));
      wrote = true;
    }
    for (const auto& [i, coef] : columns[j]) {
      out += field_line("", names.columns[j], names.rows[i], format_mps_number(coef));
      wrote = true;
    }
    if (!wrote) out += field_line("", names.columns[j], kMpsObjectiveRow, "0");
  }

  out += "RHS\n";
  for (std::size_t i = 0; i < model.num_rows(); ++i)
    if (model.row(i).rhs != 0.0)
      out += field_line("", "RHS", names.rows[i], format_mps_number(model.row(i).rhs));

  out += "BOUNDS\n";
  for (std::size_t j = 0; j < n; ++j) {
    const auto idx = static_cast<Eigen::Index>(j);
    const double lo = model.lower()[idx];
    const double hi = model.upper()[idx];
    const auto& name = names.columns[j];
    if (lo == hi) {
      out += field_line("FX", "BND", name, format_mps_number(lo));
    } else if (std::isinf(lo) && std::isinf(hi)) {
      out += field_line("FR", "BND", name, "");
    } else {
      if (std::isinf(lo))
        out += field_line("MI", "BND", name, "");
      else if (lo != 0.0)
        out += field_line("LO", "BND", name, format_mps_number(lo));
      if (!std::isinf(hi)) out += field_line("UP", "BND", name, format_mps_number(hi));
    }
  }
  out += "ENDATA\n";
  return out;
}

LpModel import_mps(std::string_view text) {
  enum class Section { None, Rows, Columns, Rhs, Bounds, Done };
  Section section = Section::None;
  LpModel model;
  std::string objective_row;
  std::unordered_map<std::string, std::size_t> row_index;
  std::unordered_map<std::string, Eigen::Index> col_index;
  std::vector<Relation> relations;
  std::vector<std::string> row_names;
  std::vector<double> rhs;
  std::vector<std::vector<Term<double>>> row_terms;

  auto fail = [](std::size_t line_no, const std::string& what) {
    throw Error(ErrorCode::ParseError, fmt::format("MPS line {}: {}", line_no, what));
  };
  auto number = [&](const std::string& s, std::size_t line_no) {
    return detail::parse_double(s, fmt::format("MPS line {}", line_no));
  };

  const auto all = detail::lines(text);
  for (std::size_t k = 0; k < all.size(); ++k) {
    const std::size_t line_no = k + 1;
    std::string_view line = all[k];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (detail::trim(line).empty() || line.front() == '*') continue;
    const auto tok = tokens(line);
    if (line.front() != ' ' && line.front() != '\t') {
      const auto& head = tok[0];
      if (head == "NAME") continue;
      if (head == "ROWS") section = Section::Rows;
      else if (head == "COLUMNS") section = Section::Columns;
      else if (head == "RHS") section = Section::Rhs;
      else if (head == "BOUNDS") section = Section::Bounds;
      else if (head == "ENDATA") section = Section::Done;
      else fail(line_no, "unsupported section '" + head + "'");
      if (section == Section::Columns) {
        for (std::size_t i = 0; i < row_names.size(); ++i) row_terms.emplace_back();
      }
      continue;
    }
    switch (section) {
      case Section::Rows: {
        if (tok.size() != 2) fail(line_no, "expected row type and name");
        if (tok[0] == "N") {
          if (objective_row.empty()) objective_row = tok[1];
          continue;
        }
        Relation rel;
        if (tok[0] == "E") rel = Relation::Equal;
        else if (tok[0] == "L") rel = Relation::LessEqual;
        else if (tok[0] == "G") rel = Relation::GreaterEqual;
        else fail(line_no, "bad row type '" + tok[0] + "'");
        if (!row_index.emplace(tok[1], row_names.size()).second) fail(line_no, "duplicate row " + tok[1]);
        row_names.push_back(tok[1]);
        relations.push_back(rel);
        rhs.push_back(0.0);
        break;
      }
      case Section::Columns: {
        if (tok.size() < 3 || tok.size() % 2 == 0) fail(line_no, "expected column and row/value pairs");
        if (tok[1] == "'MARKER'") fail(line_no, "integer markers are not supported");
        auto it = col_index.find(tok[0]);
        if (it == col_index.end()) {
          const auto j = model.add_variable(0.0, LpModel::kInf, 0.0, tok[0]);
          it = col_index.emplace(tok[0], j).first;
        }
        for (std::size_t p = 1; p + 1 < tok.size(); p += 2) {
          const double v = number(tok[p + 1], line_no);
          if (tok[p] == objective_row) {
            model.set_cost(it->second, v);
            continue;
          }
          const auto r = row_index.find(tok[p]);
          if (r == row_index.end()) fail(line_no, "unknown row " + tok[p]);
          row_terms[r->second].push_back({it->second, v});
        }
        break;
      }
      case Section::Rhs: {
        if (tok.size() < 3 || tok.size() % 2 == 0) fail(line_no, "expected set name and row/value pairs");
        for (std::size_t p = 1; p + 1 < tok.size(); p += 2) {
          if (tok[p] == objective_row) continue;
          const auto r = row_index.find(tok[p]);
          if (r == row_index.end()) fail(line_no, "unknown row " + tok[p]);
          rhs[r->second] = number(tok[p + 1], line_no);
        }
        break;
      }
      case Section::Bounds: {
        if (tok.size() < 3) fail(line_no, "expected bound type, set name and column");
        const auto c = col_index.find(tok[2]);
        if (c == col_index.end()) fail(line_no, "unknown column " + tok[2]);
        const auto j = c->second;
        double lo = model.lower()[j];
        double hi = model.upper()[j];
        const auto& type = tok[0];
        if (type == "FR") {
          lo = -LpModel::kInf;
          hi = LpModel::kInf;
        } else if (type == "MI") {
          lo = -LpModel::kInf;
        } else if (type == "PL") {
          hi = LpModel::kInf;
        } else {
          if (tok.size() != 4) fail(line_no, "bound " + type + " needs a value");
          const double v = number(tok[3], line_no);
          if (type == "UP") hi = v;
          else if (type == "LO") lo = v;
          else if (type == "FX") lo = hi = v;
          else fail(line_no, "unsupported bound type '" + type + "'");
        }
        model.set_bounds(j, lo, hi);
        break;
      }
      case Section::None:
      case Section::Done:
        fail(line_no, "data outside a section");
    }
  }
  if (section != Section::Done) throw Error(ErrorCode::ParseError, "MPS text lacks ENDATA");
  if (row_terms.size() < row_names.size()) row_terms.resize(row_names.size());
  for (std::size_t i = 0; i < row_names.size(); ++i)
    model.add_row(std::move(row_terms[i]), relations[i], rhs[i], row_names[i]);
  model.validate();
  return model;
}

ImportedSolution import_solution(const LpModel& model, std::string_view text, double tol) {
  const MpsNames names = mps_names(model);
  std::unordered_map<std::string, Eigen::Index> lookup;
  for (Eigen::Index j = 0; j < model.num_vars(); ++j) {
    if (!model.var_name(j).empty()) lookup.emplace(model.var_name(j), j);
    lookup.emplace(names.columns[static_cast<std::size_t>(j)], j);
  }

  ImportedSolution out;
  auto& x = out.solution.x;
  x.resize(model.num_vars());
  for (Eigen::Index j = 0; j < model.num_vars(); ++j) {
    const double lo = model.lower()[j];
    const double hi = model.upper()[j];
    x[j] = std::isfinite(lo) ? lo : (std::isfinite(hi) ? hi : 0.0);
  }

  const auto all = detail::lines(text);
  for (std::size_t k = 0; k < all.size(); ++k) {
    const auto line = detail::trim(all[k]);
    if (line.empty() || line.front() == '#') continue;
    const auto tok = tokens(line);
    if (tok.size() < 2)
      throw Error(ErrorCode::ParseError, fmt::format("solution line {}: expected 'name value'", k + 1));
    const auto it = lookup.find(tok[0]);
    if (it == lookup.end())
      throw Error(ErrorCode::UnknownVariableName, fmt::format("solution line {}: '{}'", k + 1, tok[0]));
    x[it->second] = detail::parse_double(tok[1], fmt::format("solution line {}", k + 1));
  }

  out.solution.objective_value = model.objective().dot(x);
  out.solution.max_violation = model.max_violation(x);
  out.infeasible = out.solution.max_violation > tol;
  out.solution.status = out.infeasible ? Status::Infeasible : Status::Optimal;
  if (out.infeasible) {
    double worst = -1.0;
    for (Eigen::Index j = 0; j < model.num_vars(); ++j) {
      const double v = std::max(model.lower()[j] - x[j], x[j] - model.upper()[j]);
      if (v > worst) {
        worst = v;
        out.worst_constraint = "bound on " + names.columns[static_cast<std::size_t>(j)];
      }
    }
    for (std::size_t i = 0; i < model.num_rows(); ++i) {
      const double lhs = model.row_activity(i, x);
      const auto& r = model.row(i);
      double v = std::abs(lhs - r.rhs);
      if (r.relation == Relation::LessEqual) v = lhs - r.rhs;
      if (r.relation == Relation::GreaterEqual) v = r.rhs - lhs;
      if (v > worst) {
        worst = v;
        out.worst_constraint = "row " + names.rows[i];
      }
    }
  }
  return out;
}

}  // namespace iamod::lp
