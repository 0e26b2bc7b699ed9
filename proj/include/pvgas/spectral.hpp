#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pvgas/bessel.hpp"
#include "pvgas/common.hpp"

/// Truncated Dirichlet eigensystem of the unit-area disk and the kernels built on it.
namespace pvgas::spectral {

enum class Parity { kCosine, kSine };

struct Mode {
  int order = 0;     // angular order n >= 0
  int radial = 1;    // k >= 1
  Parity parity = Parity::kCosine;
  double zero = 0.0;        // j_{n,k}
  double eigenvalue = 0.0;  // (j_{n,k} / R)^2
  double norm = 0.0;        // L2 normalization constant
  double mean = 0.0;        // integral of the mode over D
};

/// Tensor rule on the disk: q Gauss-Legendre radii (weight r dr) times 2q uniform angles.
class DiskQuadrature {
 public:
  static DiskQuadrature make(int order);

  int order() const { return order_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  double integrate(const std::function<double(const Vec2&)>& f) const;

 private:
  int order_ = 0;
  std::vector<Vec2> nodes_;
  std::vector<double> weights_;
};

struct BasisOptions {
  std::size_t modes = 2000;
  int quadrature_order = 0;      // 0: automatic (4x oversampling of the top radial frequency)
  std::size_t certify = 50;      // Gram check over the first `certify` modes
  bool evaluator = true;         // false: eigenvalues and means only (no point evaluation)
};

class SpectralBasis {
 public:
  static SpectralBasis build(const BasisOptions& options);

  std::size_t size() const { return modes_.size(); }
  const Mode& mode(std::size_t i) const { return modes_[i]; }
  const std::vector<Mode>& modes() const { return modes_; }
  std::vector<double> eigenvalues() const;
  std::vector<double> means() const;
  int max_order() const { return max_order_; }
  bool has_evaluator() const { return table_ != nullptr; }

  const DiskQuadrature& quadrature() const { return quadrature_; }
  /// Max |<e_i, e_j> - delta_ij| over the certified block.
  double gram_defect() const { return gram_defect_; }

  double evaluate(std::size_t i, const Vec2& x) const;
  /// out[i] = e_i(x) for i < out.size() (a prefix of the basis).
  void evaluate_all(const Vec2& x, std::span<double> out) const;

  /// <f, e_i> for every mode, by the stored quadrature.
  std::vector<double> project(const std::function<double(const Vec2&)>& f) const;

  /// Projections of several functions in one pass over the quadrature nodes.
  std::vector<std::vector<double>> project_many(
      const std::vector<std::function<double(const Vec2&)>>& fs) const;

  void save(std::ostream& os) const;
  static SpectralBasis load(std::istream& is);
  void save_file(const std::string& path) const;
  static SpectralBasis load_file(const std::string& path);

 private:
  static SpectralBasis from_modes(std::vector<Mode> modes, int quadrature_order, std::size_t certify,
                                  bool evaluator);

  std::vector<Mode> modes_;
  int max_order_ = 0;
  DiskQuadrature quadrature_;
  double gram_defect_ = 0.0;
  std::shared_ptr<const bessel::Table> table_;
};

/// Convenience wrapper matching build_basis(K, quadrature_order).
SpectralBasis build_basis(std::size_t K, int quadrature_order = 0);

/// Default radial quadrature order for a basis whose largest Bessel zero is `top_zero`.
int auto_quadrature_order(double top_zero);

enum class KernelKind { kFractional, kYukawa, kRegularPart, kZeroAvgRegular };

struct KernelSpec {
  KernelKind kind = KernelKind::kFractional;
  double parameter = 1.0;  // s for fractional, m otherwise
  const SpectralBasis* basis = nullptr;

  static KernelSpec fractional(double s, const SpectralBasis& b);
  static KernelSpec yukawa(double m, const SpectralBasis& b);
  static KernelSpec regular_part(double m, const SpectralBasis& b);
  static KernelSpec zero_avg_regular(double m, const SpectralBasis& b);

  /// Spectral multiplier applied to e_n (x) e_n at eigenvalue lambda.
  double coefficient(double lambda) const;
  bool centered() const { return kind == KernelKind::kZeroAvgRegular; }
  void validate() const;
};

/// Separation floor below which the s = 1 truncated sum is refused.
inline const double kFractionalOneFloor = 0.05 * kRadius;

double kernel_eval(const KernelSpec& spec, const Vec2& x, const Vec2& y);

/// Symmetric kernel matrix on a point set (row-major n x n).
std::vector<double> kernel_matrix(const KernelSpec& spec, std::span<const Vec2> points);

/// (1/2pi)(log(m/2) + gamma_E): the free-space regular part V_m^free(0).
double v_free_zero(double m);

/// W_m(x, y) - (1/2pi) K_0(m|x - y|) with W_m from the truncated Yukawa sum.
double w_m_harmonic_part(double m, const SpectralBasis& basis, const Vec2& x, const Vec2& y);

/// Same quantity from the Graf addition series
/// w_m = -(1/2pi) sum_n eps_n (K_n(mR)/I_n(mR)) I_n(m|x|) I_n(m|y|) cos(n(theta_x - theta_y));
/// exact to rounding and valid on the diagonal.
double w_m_exact(double m, const Vec2& x, const Vec2& y);

/// Integral of w_m(x, x) over D, from the same series with the closed-form radial integrals.
double w_m_diagonal_integral(double m);

}  // namespace pvgas::spectral
