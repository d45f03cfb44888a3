#pragma once

#include <string>
#include <utility>
#include <vector>

#include "covqec/types.hpp"

namespace covqec {

// minimize c^T x  s.t.  F0_b + sum_k x_k F_kb >= 0 for every block b,  A x = b.
struct SdpProblem {
  struct Block {
    Mat F0;                                // Hermitian, fixes the block dimension
    std::vector<std::pair<int, Mat>> terms;  // (variable, coefficient matrix)
  };
  RVec c;
  std::vector<Block> blocks;
  RMat A;  // may have zero rows
  RVec b;
};

enum class SdpStatus { optimal, infeasible, unbounded, max_iter };
std::string to_string(SdpStatus s);

struct SdpSolution {
  RVec x;
  double primal_value = 0.0;
  double dual_value = 0.0;
  SdpStatus status = SdpStatus::max_iter;
  std::vector<Mat> Z;  // dual matrix per block: Tr(F_k Z) = c_k, Z >= 0
  RVec ray;            // infeasibility certificate for the equalities: A^T y = 0, b^T y > 0
  int iterations = 0;
  double rel_gap = INFINITY;
  double primal_infeas = INFINITY;
  double dual_infeas = INFINITY;
  bool certified() const { return status == SdpStatus::optimal; }
};

struct SdpOptions {
  double gap_tol = 1e-11;
  double feas_tol = 1e-11;
  int max_iter = ITER_MAX;
};

SdpSolution solve_sdp(const SdpProblem& p, const SdpOptions& opt = {});

// Orthonormal Hermitian basis of d x d matrices under Tr(A B); x_a = Tr(E_a X) are real coordinates.
const std::vector<Mat>& herm_basis(int d);
Mat herm_from_coords(const RVec& x, int offset, int d);

// Incremental construction of SdpProblem.
class SdpBuilder {
 public:
  int add_scalar();
  int add_herm(int d);  // d*d consecutive variables in herm_basis(d) order
  int num_vars() const { return nvars_; }
  void set_cost(int var, double c);

  int add_block(int dim);
  void add_const(int blk, const Mat& F0, int row = 0, int col = 0);
  void add_term(int blk, int var, const Mat& F, int row = 0, int col = 0);
  // Places the Hermitian variable (and its adjoint for the mirrored off-diagonal position when
  // row != col) mapped through `embed`: coefficient for basis E_a is embed(E_a).
  template <class Fn>
  void add_herm_term(int blk, int var0, int d, Fn embed, int row = 0, int col = 0) {
    const auto& basis = herm_basis(d);
    for (int a = 0; a < d * d; ++a) add_term(blk, var0 + a, embed(basis[a]), row, col);
  }

  void add_equality(const std::vector<std::pair<int, double>>& coeffs, double rhs);

  SdpProblem build() const;

 private:
  int nvars_ = 0;
  std::vector<std::pair<int, double>> costs_;
  std::vector<SdpProblem::Block> blocks_;
  std::vector<std::vector<std::pair<int, double>>> eq_rows_;
  std::vector<double> eq_rhs_;
};

}  // namespace covqec
