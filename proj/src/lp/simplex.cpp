#include "rmab/lp/simplex.hpp"

#include <klu.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "rmab/errors.hpp"

namespace rmab::lp {

std::string to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration limit";
  }
  return "unknown";
}

namespace {

// Sparse LU of the basis (KLU: block triangular form, then Gilbert-Peierls).
class BasisFactor {
 public:
  BasisFactor() { klu_defaults(&common_); }
  ~BasisFactor() { release(); }
  BasisFactor(const BasisFactor&) = delete;
  BasisFactor& operator=(const BasisFactor&) = delete;

  // Columns in compressed form; returns false if the matrix is singular.
  bool factor(int n, std::vector<int> ap, std::vector<int> ai, std::vector<double> ax) {
    release();
    n_ = n;
    ap_ = std::move(ap);
    ai_ = std::move(ai);
    ax_ = std::move(ax);
    symbolic_ = klu_analyze(n_, ap_.data(), ai_.data(), &common_);
    if (!symbolic_) return false;
    numeric_ = klu_factor(ap_.data(), ai_.data(), ax_.data(), symbolic_, &common_);
    return numeric_ != nullptr && common_.status == KLU_OK;
  }

  void solve(double* b) const { klu_solve(symbolic_, numeric_, n_, 1, b, &common_); }
  void solve_transposed(double* b) const { klu_tsolve(symbolic_, numeric_, n_, 1, b, &common_); }

 private:
  void release() {
    if (numeric_) klu_free_numeric(&numeric_, &common_);
    if (symbolic_) klu_free_symbolic(&symbolic_, &common_);
  }

  int n_ = 0;
  std::vector<int> ap_, ai_;
  std::vector<double> ax_;
  klu_symbolic* symbolic_ = nullptr;
  klu_numeric* numeric_ = nullptr;
  mutable klu_common common_;
};

constexpr double kSmallPivot = 1e-7;
// Relative size of the right-hand-side shift on inequality rows.
constexpr double kPerturbation = 5e-7;
constexpr double kPivotGrowth = 1e-11;

enum class ColumnKind : unsigned char { Structural, Slack, Artificial };

enum class PhaseOutcome { Optimal, Unbounded, Infeasible, IterationLimit };

// Deterministic value in [0, 1) per row.
double row_jitter(int i) {
  std::uint64_t z = static_cast<std::uint64_t>(i) + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

struct Eta {
  int pos = 0;
  double pivot = 1.0;
  std::vector<int> idx;
  std::vector<double> val;
};

class Engine {
 public:
  Engine(const LpProgram& program, const SimplexOptions& options) : program_(program), opt_(options) {
    build_standard_form();
  }

  SolveResult run() {
    SolveResult result;
    result.x.assign(n_struct_, 0.0);
    if (m_ == 0) return solve_without_rows();

    iteration_limit_ = opt_.max_iterations > 0 ? opt_.max_iterations : 20L * (m_ + num_cols()) + 1000;

    // These LPs are massively degenerate (band and flow rows with zero
    // right-hand side). Solving with slightly relaxed inequality rows keeps
    // the primal steps nondegenerate; the exact right-hand side is restored
    // at the end and a few dual simplex pivots repair the basis.
    b_exact_ = b_;
    for (int i = 0; i < m_; ++i)
      if (unit_slack_[i]) b_[i] += kPerturbation * (1.0 + b_[i]) * (1.0 + row_jitter(i));

    const WarmStart warm = try_warm_start();
    result.warm_started = warm != WarmStart::None;
    if (warm == WarmStart::Dual) {
      const PhaseOutcome d = dual_cleanup();
      if (d != PhaseOutcome::Optimal) {
        result.status = d == PhaseOutcome::Infeasible ? Status::Infeasible : Status::IterationLimit;
        result.iterations = iterations_;
        return result;
      }
    } else if (warm == WarmStart::None) {
      cold_start();
      set_phase_one_costs();
      PhaseOutcome p1 = iterate(false);
      if (p1 == PhaseOutcome::IterationLimit) {
        result.status = Status::IterationLimit;
        result.iterations = iterations_;
        return result;
      }
      double infeasibility = 0.0;
      for (int i = 0; i < m_; ++i)
        if (kind_[head_[i]] == ColumnKind::Artificial) infeasibility += std::max(0.0, xb_[i]);
      if (infeasibility > 1e-7 * (1.0 + b_scale_)) {
        result.status = Status::Infeasible;
        result.iterations = iterations_;
        return result;
      }
    }

    set_phase_two_costs();
    PhaseOutcome p2 = iterate(true);
    result.iterations = iterations_;
    if (p2 == PhaseOutcome::Unbounded) {
      result.status = Status::Unbounded;
      return result;
    }
    if (p2 == PhaseOutcome::IterationLimit) {
      result.status = Status::IterationLimit;
      return result;
    }

    b_ = b_exact_;
    if (!refactor()) throw SolverError("basis became singular during refactorization");
    const PhaseOutcome cleanup = dual_cleanup();
    result.iterations = iterations_;
    if (cleanup == PhaseOutcome::Infeasible) {
      result.status = Status::Infeasible;
      return result;
    }
    if (cleanup == PhaseOutcome::IterationLimit) {
      result.status = Status::IterationLimit;
      return result;
    }

    for (int i = 0; i < m_; ++i)
      if (head_[i] < n_struct_) result.x[head_[i]] = xb_[i];
    result.status = Status::Optimal;
    result.objective = 0.0;
    for (int j = 0; j < n_struct_; ++j) result.objective += program_.objective[j] * result.x[j];
    result.max_violation = max_violation(program_, result.x);
    return result;
  }

 private:
  int num_cols() const { return static_cast<int>(kind_.size()); }

  void build_standard_form() {
    m_ = program_.num_rows();
    n_struct_ = program_.num_cols();
    row_sign_.assign(m_, 1.0);
    b_.assign(m_, 0.0);
    b_scale_ = 0.0;
    for (int i = 0; i < m_; ++i) {
      if (program_.rhs[i] < 0.0) row_sign_[i] = -1.0;
      b_[i] = row_sign_[i] * program_.rhs[i];
      b_scale_ = std::max(b_scale_, b_[i]);
    }

    // Structural columns in CSC with duplicate entries merged.
    std::vector<Entry> entries = program_.entries;
    for (const auto& e : entries)
      if (e.row < 0 || e.row >= m_ || e.col < 0 || e.col >= n_struct_)
        throw UsageError("LpProgram entry out of range");
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      return a.col != b.col ? a.col < b.col : a.row < b.row;
    });
    cstart_.assign(1, 0);
    std::size_t k = 0;
    for (int j = 0; j < n_struct_; ++j) {
      while (k < entries.size() && entries[k].col == j) {
        const int row = entries[k].row;
        double v = 0.0;
        while (k < entries.size() && entries[k].col == j && entries[k].row == row) v += entries[k++].value;
        if (v != 0.0) {
          crow_.push_back(row);
          cval_.push_back(row_sign_[row] * v);
        }
      }
      cstart_.push_back(static_cast<int>(crow_.size()));
      kind_.push_back(ColumnKind::Structural);
    }

    // Slacks, then artificials for rows without a +1 slack.
    slack_of_row_.assign(m_, -1);
    unit_slack_.assign(m_, false);
    for (int i = 0; i < m_; ++i) {
      if (program_.senses[i] == Sense::Equal) continue;
      const double coef = row_sign_[i] * (program_.senses[i] == Sense::LessEqual ? 1.0 : -1.0);
      slack_of_row_[i] = push_unit_column(i, coef, ColumnKind::Slack);
      unit_slack_[i] = coef > 0.0;
    }
    artificial_of_row_.assign(m_, -1);
    for (int i = 0; i < m_; ++i)
      if (!unit_slack_[i]) artificial_of_row_[i] = push_unit_column(i, 1.0, ColumnKind::Artificial);

    cost_.assign(num_cols(), 0.0);
    where_.assign(num_cols(), -1);
    rejected_.assign(num_cols(), 0);
  }

  int push_unit_column(int row, double coef, ColumnKind kind) {
    crow_.push_back(row);
    cval_.push_back(coef);
    cstart_.push_back(static_cast<int>(crow_.size()));
    kind_.push_back(kind);
    return num_cols() - 1;
  }

  SolveResult solve_without_rows() {
    SolveResult result;
    result.x.assign(n_struct_, 0.0);
    for (int j = 0; j < n_struct_; ++j) {
      const double c = program_.maximize ? program_.objective[j] : -program_.objective[j];
      if (c > 0.0) {
        result.status = Status::Unbounded;
        return result;
      }
    }
    result.status = Status::Optimal;
    return result;
  }

  // Primal: the hinted basis is feasible and phase two starts from it. Dual:
  // it is infeasible but its reduced costs are optimal, so the dual simplex
  // can start from it.
  enum class WarmStart { None, Primal, Dual };

  WarmStart try_warm_start() {
    const WarmStart none = WarmStart::None;
    if (program_.basis_hint.empty()) return none;
    std::vector<int> basis;
    basis.reserve(m_);
    std::vector<char> used(num_cols(), 0);
    for (int j : program_.basis_hint) {
      if (j < 0 || j >= n_struct_ || used[j]) return none;
      used[j] = 1;
      basis.push_back(j);
    }
    for (int i = 0; i < m_; ++i)
      if (slack_of_row_[i] >= 0) basis.push_back(slack_of_row_[i]);
    if (static_cast<int>(basis.size()) != m_) return none;
    set_basis(basis);
    if (!refactor()) return none;
    bool feasible = true;
    for (double v : xb_) feasible = feasible && v >= -opt_.feasibility_tol;
    if (feasible) return WarmStart::Primal;

    set_phase_two_costs();
    std::vector<double> y(m_);
    for (int i = 0; i < m_; ++i) y[i] = cost_[head_[i]];
    btran(y);
    for (int j = 0; j < num_cols(); ++j) {
      if (!eligible(j, true)) continue;
      double d = cost_[j];
      for (int k = cstart_[j]; k < cstart_[j + 1]; ++k) d -= y[crow_[k]] * cval_[k];
      if (d < -opt_.optimality_tol) return none;
    }
    return WarmStart::Dual;
  }

  void cold_start() {
    std::vector<int> basis(m_);
    for (int i = 0; i < m_; ++i) basis[i] = unit_slack_[i] ? slack_of_row_[i] : artificial_of_row_[i];
    set_basis(basis);
    if (!refactor()) throw SolverError("identity basis failed to factorize");
  }

  void set_basis(const std::vector<int>& basis) {
    head_ = basis;
    std::fill(where_.begin(), where_.end(), -1);
    for (int i = 0; i < m_; ++i) where_[head_[i]] = i;
  }

  void set_phase_one_costs() {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (int j = 0; j < num_cols(); ++j)
      if (kind_[j] == ColumnKind::Artificial) cost_[j] = 1.0;
  }

  void set_phase_two_costs() {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (int j = 0; j < n_struct_; ++j) cost_[j] = program_.maximize ? -program_.objective[j] : program_.objective[j];
  }

  bool refactor() {
    std::vector<int> ap(1, 0), ai;
    std::vector<double> ax;
    for (int i = 0; i < m_; ++i) {
      const int j = head_[i];
      ai.insert(ai.end(), crow_.begin() + cstart_[j], crow_.begin() + cstart_[j + 1]);
      ax.insert(ax.end(), cval_.begin() + cstart_[j], cval_.begin() + cstart_[j + 1]);
      ap.push_back(static_cast<int>(ai.size()));
    }
    etas_.clear();
    if (!lu_.factor(m_, std::move(ap), std::move(ai), std::move(ax))) return false;
    xb_ = b_;
    ftran(xb_);
    return true;
  }

  void ftran(std::vector<double>& v) const {
    lu_.solve(v.data());
    for (const Eta& eta : etas_) {
      const double vr = v[eta.pos] / eta.pivot;
      if (vr != 0.0)
        for (std::size_t k = 0; k < eta.idx.size(); ++k) v[eta.idx[k]] -= eta.val[k] * vr;
      v[eta.pos] = vr;
    }
  }

  void btran(std::vector<double>& w) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double acc = w[it->pos];
      for (std::size_t k = 0; k < it->idx.size(); ++k) acc -= it->val[k] * w[it->idx[k]];
      w[it->pos] = acc / it->pivot;
    }
    lu_.solve_transposed(w.data());
  }

  bool eligible(int j, bool phase_two) const {
    if (where_[j] >= 0 || rejected_[j]) return false;
    return !(phase_two && kind_[j] == ColumnKind::Artificial);
  }

  int price(const std::vector<double>& y, bool phase_two, bool bland) const {
    int best = -1;
    double best_d = -opt_.optimality_tol;
    for (int j = 0; j < num_cols(); ++j) {
      if (!eligible(j, phase_two)) continue;
      double d = cost_[j];
      for (int k = cstart_[j]; k < cstart_[j + 1]; ++k) d -= y[crow_[k]] * cval_[k];
      if (d < best_d) {
        best = j;
        if (bland) return best;
        best_d = d;
      }
    }
    return best;
  }

  bool blocked_artificial(int pos, bool phase_two) const {
    return phase_two && kind_[head_[pos]] == ColumnKind::Artificial;
  }

  int ratio_test(const std::vector<double>& alpha, bool phase_two, bool bland, double& theta) const {
    const double ptol = opt_.pivot_tol;
    // Basic artificials left over from phase one must stay at zero.
    int forced = -1;
    for (int i = 0; i < m_; ++i) {
      if (blocked_artificial(i, phase_two) && std::abs(alpha[i]) > ptol) {
        if (forced < 0 || std::abs(alpha[i]) > std::abs(alpha[forced])) forced = i;
      }
    }
    if (forced >= 0) {
      theta = 0.0;
      return forced;
    }

    if (bland) {
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        if (alpha[i] <= ptol) continue;
        const double ratio = std::max(0.0, xb_[i]) / alpha[i];
        if (ratio < best || (ratio == best && head_[i] < head_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      theta = best;
      return leave;
    }

    double bound = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m_; ++i)
      if (alpha[i] > ptol) bound = std::min(bound, (std::max(0.0, xb_[i]) + opt_.feasibility_tol) / alpha[i]);
    if (!std::isfinite(bound)) return -1;
    int leave = -1;
    for (int i = 0; i < m_; ++i) {
      if (alpha[i] <= ptol) continue;
      if (std::max(0.0, xb_[i]) / alpha[i] > bound) continue;
      if (leave < 0 || alpha[i] > alpha[leave] || (alpha[i] == alpha[leave] && head_[i] < head_[leave])) leave = i;
    }
    theta = std::max(0.0, xb_[leave]) / alpha[leave];
    return leave;
  }

  // Dual simplex from a dual feasible basis until the basic solution is
  // primal feasible. Basic artificials must also return to zero.
  PhaseOutcome dual_cleanup() {
    const double tol = opt_.feasibility_tol;
    std::vector<double> y(m_), rho(m_), alpha(m_);
    bool fresh = true;
    for (;;) {
      if (iterations_ >= iteration_limit_) return PhaseOutcome::IterationLimit;
      if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) {
        if (!refactor()) throw SolverError("basis became singular during refactorization");
        fresh = true;
      }
      int r = -1;
      double worst = tol;
      for (int i = 0; i < m_; ++i) {
        const double v = kind_[head_[i]] == ColumnKind::Artificial ? std::abs(xb_[i]) : -xb_[i];
        if (v > worst) {
          worst = v;
          r = i;
        }
      }
      if (r < 0) {
        if (fresh) return PhaseOutcome::Optimal;
        if (!refactor()) throw SolverError("basis became singular during refactorization");
        fresh = true;
        continue;
      }

      for (int i = 0; i < m_; ++i) y[i] = cost_[head_[i]];
      btran(y);
      std::fill(rho.begin(), rho.end(), 0.0);
      rho[r] = 1.0;
      btran(rho);
      const double sign = xb_[r] < 0.0 ? -1.0 : 1.0;

      int entering = -1;
      double best_ratio = std::numeric_limits<double>::infinity(), best_alpha = 0.0;
      for (int j = 0; j < num_cols(); ++j) {
        if (!eligible(j, true)) continue;
        double a = 0.0, d = cost_[j];
        for (int k = cstart_[j]; k < cstart_[j + 1]; ++k) {
          a += rho[crow_[k]] * cval_[k];
          d -= y[crow_[k]] * cval_[k];
        }
        a *= sign;
        if (a <= opt_.pivot_tol) continue;
        const double ratio = std::max(0.0, d) / a;
        if (ratio < best_ratio || (ratio == best_ratio && a > best_alpha)) {
          best_ratio = ratio;
          best_alpha = a;
          entering = j;
        }
      }
      if (entering < 0) {
        if (fresh) return PhaseOutcome::Infeasible;
        if (!refactor()) throw SolverError("basis became singular during refactorization");
        fresh = true;
        continue;
      }

      std::fill(alpha.begin(), alpha.end(), 0.0);
      for (int k = cstart_[entering]; k < cstart_[entering + 1]; ++k) alpha[crow_[k]] = cval_[k];
      ftran(alpha);
      if (std::abs(alpha[r]) < kSmallPivot && !fresh) {
        if (!refactor()) throw SolverError("basis became singular during refactorization");
        fresh = true;
        continue;
      }
      pivot(entering, r, alpha, xb_[r] / alpha[r]);
      ++iterations_;
      fresh = false;
    }
  }

  bool small_pivot(const std::vector<double>& alpha, int leave) const {
    double largest = 0.0;
    for (double v : alpha) largest = std::max(largest, std::abs(v));
    const double p = std::abs(alpha[leave]);
    return p < kSmallPivot || p < kPivotGrowth * largest;
  }

  void clear_rejected() {
    for (int j : rejected_list_) rejected_[j] = 0;
    rejected_list_.clear();
  }

  void pivot(int entering, int leave, const std::vector<double>& alpha, double theta) {
    for (int i = 0; i < m_; ++i)
      if (alpha[i] != 0.0) xb_[i] -= theta * alpha[i];
    xb_[leave] = theta;

    Eta eta;
    eta.pos = leave;
    eta.pivot = alpha[leave];
    for (int i = 0; i < m_; ++i) {
      if (i == leave || std::abs(alpha[i]) < 1e-14) continue;
      eta.idx.push_back(i);
      eta.val.push_back(alpha[i]);
    }
    etas_.push_back(std::move(eta));

    where_[head_[leave]] = -1;
    head_[leave] = entering;
    where_[entering] = leave;
  }

  PhaseOutcome iterate(bool phase_two) {
    std::vector<double> y(m_), alpha(m_);
    int degenerate_run = 0;
    bool bland = false;
    bool fresh = etas_.empty();
    for (;;) {
      if (iterations_ >= iteration_limit_) return PhaseOutcome::IterationLimit;
      if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) {
        if (!refactor()) throw SolverError("basis became singular during refactorization");
        fresh = true;
      }

      for (int i = 0; i < m_; ++i) y[i] = cost_[head_[i]];
      btran(y);
      const int entering = price(y, phase_two, bland);
      if (entering < 0) {
        if (fresh) {
          if (rejected_list_.empty()) return PhaseOutcome::Optimal;
          // Only skipped columns price out: take the small pivot after all.
          clear_rejected();
          allow_small_ = true;
          continue;
        }
        // Confirm optimality against a clean factorization.
        if (!refactor()) throw SolverError("basis became singular during refactorization");
        fresh = true;
        continue;
      }

      std::fill(alpha.begin(), alpha.end(), 0.0);
      for (int k = cstart_[entering]; k < cstart_[entering + 1]; ++k) alpha[crow_[k]] = cval_[k];
      ftran(alpha);

      double theta = 0.0;
      const int leave = ratio_test(alpha, phase_two, bland, theta);
      if (leave < 0) return PhaseOutcome::Unbounded;

      // A tiny pivot computed through the eta file is often a rounded zero.
      // Recheck it against a fresh factorization and skip the column if it
      // stays tiny, otherwise the next refactorization finds a singular basis.
      if (!allow_small_ && small_pivot(alpha, leave)) {
        if (!fresh) {
          if (!refactor()) throw SolverError("basis became singular during refactorization");
          fresh = true;
          continue;
        }
        rejected_[entering] = 1;
        rejected_list_.push_back(entering);
        continue;
      }
      clear_rejected();

      pivot(entering, leave, alpha, theta);
      ++iterations_;
      fresh = false;
      allow_small_ = false;

      if (theta <= 1e-12) {
        if (++degenerate_run >= opt_.degenerate_switch) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
    }
  }

  const LpProgram& program_;
  const SimplexOptions& opt_;

  int m_ = 0;
  int n_struct_ = 0;
  std::vector<double> row_sign_;
  std::vector<double> b_;
  std::vector<double> b_exact_;
  double b_scale_ = 0.0;

  std::vector<int> cstart_;
  std::vector<int> crow_;
  std::vector<double> cval_;
  std::vector<ColumnKind> kind_;
  std::vector<int> slack_of_row_;
  std::vector<bool> unit_slack_;
  std::vector<int> artificial_of_row_;

  std::vector<double> cost_;
  std::vector<int> head_;
  std::vector<int> where_;
  std::vector<double> xb_;

  BasisFactor lu_;
  std::vector<Eta> etas_;
  std::vector<char> rejected_;
  std::vector<int> rejected_list_;
  bool allow_small_ = false;

  long iterations_ = 0;
  long iteration_limit_ = 0;

};

}  // namespace

SolveResult RevisedSimplex::solve(const LpProgram& program) const {
  if (program.rhs.size() != program.senses.size()) throw UsageError("LpProgram: rhs/sense size mismatch");
  Engine engine(program, options_);
  return engine.run();
}

const LpSolver& default_solver() {
  static const RevisedSimplex solver;
  return solver;
}

}  // namespace rmab::lp
