#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sdrloc/types.hpp"

namespace sdrloc {

enum class Sense { Minimize, Maximize };
enum class ConstraintOp { Equal, LessEqual, GreaterEqual };

/// Affine expression over PSD-block entries and free variables. A term with
/// coefficient c on entry (row, col) contributes c * X(row, col); entries
/// (row, col) and (col, row) refer to the same value.
struct LinExpr {
  struct BlockTerm {
    int block;
    int row;
    int col;
    Scalar coeff;
  };
  std::vector<BlockTerm> block_terms;
  std::vector<std::pair<int, Scalar>> free_terms;
  Scalar constant = 0.0;

  LinExpr& add(int block, int row, int col, Scalar coeff);
  LinExpr& add_free(int var, Scalar coeff);
  /// Adds factor * <M, X_block> for a symmetric coefficient matrix M.
  LinExpr& add_inner(int block, const Mat& M, Scalar factor = 1.0);
};

struct LinearConstraint {
  LinExpr expr;
  ConstraintOp op = ConstraintOp::Equal;
  Scalar rhs = 0.0;
  std::string name;
};

/// Symmetric affine matrix expression required positive semidefinite.
class LmiConstraint {
 public:
  LmiConstraint(int side, std::string name);
  int side() const { return side_; }
  const std::string& name() const { return name_; }
  LinExpr& at(int row, int col);
  const LinExpr& at(int row, int col) const;

 private:
  int side_;
  std::string name_;
  std::vector<LinExpr> upper_;  // packed upper triangle, row-major
};

/// Block-structured conic program: PSD matrix blocks, free scalars, a linear
/// objective, scalar equality/inequality constraints and LMI constraints.
class SdpProblem {
 public:
  int add_psd_block(const std::string& name, int size);
  int add_free_var(const std::string& name);
  void set_objective(Sense sense, LinExpr objective);
  void add_constraint(LinExpr expr, ConstraintOp op, Scalar rhs, std::string name = {});
  LmiConstraint& add_lmi(int side, std::string name = {});

  int block_count() const { return static_cast<int>(block_sizes_.size()); }
  int block_size(int b) const { return block_sizes_[b]; }
  const std::string& block_name(int b) const { return block_names_[b]; }
  int block_index(const std::string& name) const;
  int free_count() const { return static_cast<int>(free_names_.size()); }
  const std::string& free_name(int v) const { return free_names_[v]; }
  Sense sense() const { return sense_; }
  const LinExpr& objective() const { return objective_; }
  const std::vector<LinearConstraint>& constraints() const { return constraints_; }
  const std::vector<LmiConstraint>& lmis() const { return lmis_; }

  /// Throws if any referenced block/entry/variable is out of range.
  void validate() const;

  /// Debug dump (blocks, variables, constraint triplets) for cross-checking
  /// against external solvers.
  std::string dump_json() const;

 private:
  void check_expr(const LinExpr& expr) const;

  std::vector<std::string> block_names_;
  std::vector<int> block_sizes_;
  std::vector<std::string> free_names_;
  Sense sense_ = Sense::Minimize;
  LinExpr objective_;
  std::vector<LinearConstraint> constraints_;
  std::vector<LmiConstraint> lmis_;
};

struct SolverSettings {
  Scalar tolerance = 1e-8;             // feasibility and relative-gap target
  Scalar inaccurate_tolerance = 1e-5;  // weaker band still reported as Inaccurate
  int max_iterations = 100;
  // when positive, also capture the iterate where the normalized barrier
  // parameter first drops below this value (used for rank diagnostics that
  // should not depend on how far past convergence the solve is polished)
  Scalar diagnostic_mu = 0.0;
  bool verbose = false;
};

struct SdpResiduals {
  Scalar primal_feas = 0.0;
  Scalar dual_feas = 0.0;
  Scalar gap = 0.0;
};

struct SdpSolution {
  std::vector<Mat> block_values;  // indexed like SdpProblem blocks
  std::vector<Scalar> free_values;
  Scalar objective_value = 0.0;
  SolverStatus status = SolverStatus::Failed;
  FailureKind failure = FailureKind::None;
  SdpResiduals residuals;
  int iterations = 0;
  // snapshot at settings.diagnostic_mu, empty when not requested; falls back
  // to the final blocks when the solve never reached that precision
  std::vector<Mat> diagnostic_blocks;
  // dual slack for each declared block (the dual side is feasible by
  // construction, so its null space locates optimal-face directions more
  // accurately than the primal iterate)
  std::vector<Mat> dual_blocks;

  const Mat& block(int b) const { return block_values.at(b); }
  const Mat& diagnostic_block(int b) const {
    return diagnostic_blocks.empty() ? block_values.at(b) : diagnostic_blocks.at(b);
  }
};

/// Dense primal-dual interior-point solve of the given program. All blocks
/// here are small (sides well under ~100), so no sparsity is exploited.
SdpSolution solve_sdp(const SdpProblem& problem, const SolverSettings& settings = {});

}  // namespace sdrloc
