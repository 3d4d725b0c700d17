#pragma once

#include <iosfwd>
#include <span>
#include <vector>

namespace rmab::lp {

enum class Sense { Equal, LessEqual, GreaterEqual };

/// One nonzero of the constraint matrix.
struct Entry {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// A linear program over nonnegative columns, constraints in sparse triplet
/// form. Every column has bounds [0, +inf); there is no other bound type.
struct LpProgram {
  bool maximize = true;
  std::vector<double> objective;
  std::vector<Sense> senses;
  std::vector<double> rhs;
  std::vector<Entry> entries;
  /// Optional warm start: structural columns that, together with the slack
  /// of every inequality row, form a nonsingular primal-feasible basis. The
  /// solver verifies the claim and falls back to a phase-one start if it fails.
  std::vector<int> basis_hint;

  int num_rows() const { return static_cast<int>(senses.size()); }
  int num_cols() const { return static_cast<int>(objective.size()); }

  int add_col(double cost) {
    objective.push_back(cost);
    return num_cols() - 1;
  }
  int add_row(Sense sense, double value) {
    senses.push_back(sense);
    rhs.push_back(value);
    return num_rows() - 1;
  }
  void add_entry(int row, int col, double value) {
    if (value != 0.0) entries.push_back({row, col, value});
  }
};

/// Row activities A x.
std::vector<double> row_activity(const LpProgram& program, std::span<const double> x);

/// Largest violation over all rows and nonnegativity bounds.
double max_violation(const LpProgram& program, std::span<const double> x);

/// Plain-text triplet dump for cross-checking against external solvers:
///
///   lp <rows> <cols> <nonzeros> <max|min>
///   c <col> <objective coefficient>       (one per nonzero objective entry)
///   r <row> <E|L|G> <rhs>                 (one per row)
///   <row> <col> <value>                   (one per matrix nonzero)
///
/// Numbers use 17 significant digits so the dump round-trips exactly.
void write_triplets(std::ostream& out, const LpProgram& program);
LpProgram read_triplets(std::istream& in);

}  // namespace rmab::lp
