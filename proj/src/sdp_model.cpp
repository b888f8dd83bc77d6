#include "sdrloc/sdp.hpp"

#include <json.hpp>

#include <algorithm>

namespace sdrloc {

LinExpr& LinExpr::add(int block, int row, int col, Scalar coeff) {
  if (row > col) std::swap(row, col);
  block_terms.push_back({block, row, col, coeff});
  return *this;
}

LinExpr& LinExpr::add_free(int var, Scalar coeff) {
  free_terms.emplace_back(var, coeff);
  return *this;
}

LinExpr& LinExpr::add_inner(int block, const Mat& M, Scalar factor) {
  const int s = static_cast<int>(M.rows());
  for (int i = 0; i < s; ++i) {
    if (M(i, i) != 0.0) add(block, i, i, factor * M(i, i));
    for (int j = i + 1; j < s; ++j) {
      const Scalar sym = M(i, j) + M(j, i);  // <M, X> counts both mirror entries
      if (sym != 0.0) add(block, i, j, factor * sym);
    }
  }
  return *this;
}

LmiConstraint::LmiConstraint(int side, std::string name)
    : side_(side), name_(std::move(name)), upper_(side * (side + 1) / 2) {
  if (side < 1) throw DimensionMismatch("LmiConstraint: side must be >= 1");
}

namespace {
inline int upper_index(int side, int row, int col) {
  if (row > col) std::swap(row, col);
  // row-major packed upper triangle
  return row * side - row * (row - 1) / 2 + (col - row);
}
}  // namespace

LinExpr& LmiConstraint::at(int row, int col) {
  if (row < 0 || col < 0 || row >= side_ || col >= side_)
    throw DimensionMismatch("LmiConstraint::at: index out of range");
  return upper_[upper_index(side_, row, col)];
}

const LinExpr& LmiConstraint::at(int row, int col) const {
  return const_cast<LmiConstraint*>(this)->at(row, col);
}

int SdpProblem::add_psd_block(const std::string& name, int size) {
  if (size < 1) throw DimensionMismatch("add_psd_block: size must be >= 1");
  block_names_.push_back(name);
  block_sizes_.push_back(size);
  return block_count() - 1;
}

int SdpProblem::add_free_var(const std::string& name) {
  free_names_.push_back(name);
  return free_count() - 1;
}

void SdpProblem::set_objective(Sense sense, LinExpr objective) {
  sense_ = sense;
  objective_ = std::move(objective);
}

void SdpProblem::add_constraint(LinExpr expr, ConstraintOp op, Scalar rhs, std::string name) {
  constraints_.push_back({std::move(expr), op, rhs, std::move(name)});
}

LmiConstraint& SdpProblem::add_lmi(int side, std::string name) {
  lmis_.emplace_back(side, std::move(name));
  return lmis_.back();
}

int SdpProblem::block_index(const std::string& name) const {
  for (int b = 0; b < block_count(); ++b)
    if (block_names_[b] == name) return b;
  throw std::invalid_argument("block_index: no block named " + name);
}

void SdpProblem::check_expr(const LinExpr& expr) const {
  for (const auto& t : expr.block_terms) {
    if (t.block < 0 || t.block >= block_count())
      throw std::invalid_argument("SdpProblem: term references unknown block");
    const int s = block_sizes_[t.block];
    if (t.row < 0 || t.col < 0 || t.row >= s || t.col >= s)
      throw std::invalid_argument("SdpProblem: term entry outside block " + block_names_[t.block]);
    if (!std::isfinite(t.coeff)) throw std::invalid_argument("SdpProblem: non-finite coefficient");
  }
  for (const auto& [var, coeff] : expr.free_terms) {
    if (var < 0 || var >= free_count())
      throw std::invalid_argument("SdpProblem: term references unknown free variable");
    if (!std::isfinite(coeff)) throw std::invalid_argument("SdpProblem: non-finite coefficient");
  }
}

void SdpProblem::validate() const {
  check_expr(objective_);
  for (const auto& c : constraints_) {
    check_expr(c.expr);
    if (c.expr.block_terms.empty() && c.expr.free_terms.empty())
      throw std::invalid_argument("SdpProblem: constraint '" + c.name + "' references no variable");
    if (!std::isfinite(c.rhs)) throw std::invalid_argument("SdpProblem: non-finite rhs");
  }
  for (const auto& lmi : lmis_)
    for (int i = 0; i < lmi.side(); ++i)
      for (int j = i; j < lmi.side(); ++j) check_expr(lmi.at(i, j));
}

namespace {

nlohmann::ordered_json expr_to_json(const LinExpr& e) {
  nlohmann::ordered_json out;
  out["terms"] = nlohmann::json::array();
  for (const auto& t : e.block_terms)
    out["terms"].push_back({{"block", t.block}, {"row", t.row}, {"col", t.col}, {"coeff", t.coeff}});
  out["free_terms"] = nlohmann::json::array();
  for (const auto& [var, coeff] : e.free_terms)
    out["free_terms"].push_back({{"var", var}, {"coeff", coeff}});
  out["constant"] = e.constant;
  return out;
}

}  // namespace

std::string SdpProblem::dump_json() const {
  nlohmann::ordered_json doc;
  doc["psd_blocks"] = nlohmann::json::array();
  for (int b = 0; b < block_count(); ++b)
    doc["psd_blocks"].push_back({{"name", block_names_[b]}, {"size", block_sizes_[b]}});
  doc["free_vars"] = free_names_;
  doc["sense"] = sense_ == Sense::Maximize ? "maximize" : "minimize";
  doc["objective"] = expr_to_json(objective_);
  doc["constraints"] = nlohmann::json::array();
  for (const auto& c : constraints_) {
    const char* op = c.op == ConstraintOp::Equal ? "==" : (c.op == ConstraintOp::LessEqual ? "<=" : ">=");
    doc["constraints"].push_back(
        {{"name", c.name}, {"op", op}, {"rhs", c.rhs}, {"expr", expr_to_json(c.expr)}});
  }
  doc["lmi_constraints"] = nlohmann::json::array();
  for (const auto& lmi : lmis_) {
    nlohmann::ordered_json entry;
    entry["name"] = lmi.name();
    entry["side"] = lmi.side();
    entry["entries"] = nlohmann::json::array();
    for (int i = 0; i < lmi.side(); ++i)
      for (int j = i; j < lmi.side(); ++j) {
        const LinExpr& e = lmi.at(i, j);
        if (e.block_terms.empty() && e.free_terms.empty() && e.constant == 0.0) continue;
        entry["entries"].push_back({{"row", i}, {"col", j}, {"expr", expr_to_json(e)}});
      }
    doc["lmi_constraints"].push_back(entry);
  }
  return doc.dump(2);
}

}  // namespace sdrloc
