#include <cmath>
#include <string>

#include "msl/fem.hpp"

namespace msl::fem {
namespace {

constexpr std::array<double, 8> kXi = {-1, 1, 1, -1, -1, 1, 1, -1};
constexpr std::array<double, 8> kEta = {-1, -1, 1, 1, -1, -1, 1, 1};
constexpr std::array<double, 8> kZeta = {-1, -1, -1, -1, 1, 1, 1, 1};

using Matrix38 = Eigen::Matrix<double, 3, 8>;
using Matrix6x24 = Eigen::Matrix<double, 6, 24>;
using Matrix66 = Eigen::Matrix<double, 6, 6>;

struct GaussPoint {
  Point xi;
  double weight;
};

// 2x2x2 Gauss-Legendre: exact for the trilinear mass and for stiffness on
// affine (parallelepiped) elements.
std::array<GaussPoint, 8> gauss_2x2x2() {
  const double g = 1.0 / std::sqrt(3.0);
  std::array<GaussPoint, 8> pts{};
  int k = 0;
  for (double z : {-g, g}) {
    for (double y : {-g, g}) {
      for (double x : {-g, g}) pts[k++] = {Point(x, y, z), 1.0};
    }
  }
  return pts;
}

Eigen::Matrix<double, 8, 1> shape(const Point& xi) {
  Eigen::Matrix<double, 8, 1> n;
  for (int a = 0; a < 8; ++a) {
    n(a) = 0.125 * (1 + xi.x() * kXi[a]) * (1 + xi.y() * kEta[a]) * (1 + xi.z() * kZeta[a]);
  }
  return n;
}

Matrix38 shape_gradient_natural(const Point& xi) {
  Matrix38 d;
  for (int a = 0; a < 8; ++a) {
    const double fx = 1 + xi.x() * kXi[a];
    const double fy = 1 + xi.y() * kEta[a];
    const double fz = 1 + xi.z() * kZeta[a];
    d(0, a) = 0.125 * kXi[a] * fy * fz;
    d(1, a) = 0.125 * kEta[a] * fx * fz;
    d(2, a) = 0.125 * kZeta[a] * fx * fy;
  }
  return d;
}

Eigen::Matrix<double, 3, 8> corner_matrix(const Hex8Geometry& g) {
  Eigen::Matrix<double, 3, 8> x;
  for (int a = 0; a < 8; ++a) x.col(a) = g.corners[static_cast<std::size_t>(a)];
  return x;
}

// Returns det J and writes the physical shape gradient (3x8).
double physical_gradient(const Hex8Geometry& g, const Point& xi, Matrix38& grad) {
  const Matrix38 dn = shape_gradient_natural(xi);
  const Eigen::Matrix3d jac = dn * corner_matrix(g).transpose();  // J(i,j) = dx_j / dxi_i
  const double det = jac.determinant();
  if (!(det > 0.0)) {
    throw Error(Errc::DegenerateJacobian,
                "Jacobian determinant " + std::to_string(det) + " is not positive");
  }
  grad = jac.inverse() * dn;
  return det;
}

Matrix66 isotropic_elasticity(const Material& mat) {
  const double e = mat.young_modulus;
  const double nu = mat.poisson_ratio;
  const double lambda = e * nu / ((1 + nu) * (1 - 2 * nu));
  const double mu = e / (2 * (1 + nu));
  Matrix66 d = Matrix66::Zero();
  d.topLeftCorner<3, 3>().setConstant(lambda);
  d.topLeftCorner<3, 3>().diagonal().array() += 2 * mu;
  d.bottomRightCorner<3, 3>().diagonal().setConstant(mu);
  return d;
}

// Strain-displacement operator in Voigt order (xx, yy, zz, xy, yz, zx) with
// engineering shear, columns component-blocked.
Matrix6x24 strain_operator(const Matrix38& grad) {
  Matrix6x24 b = Matrix6x24::Zero();
  for (int a = 0; a < 8; ++a) {
    const int ux = a;
    const int uy = 8 + a;
    const int uz = 16 + a;
    b(0, ux) = grad(0, a);
    b(1, uy) = grad(1, a);
    b(2, uz) = grad(2, a);
    b(3, ux) = grad(1, a);
    b(3, uy) = grad(0, a);
    b(4, uy) = grad(2, a);
    b(4, uz) = grad(1, a);
    b(5, uz) = grad(0, a);
    b(5, ux) = grad(2, a);
  }
  return b;
}

Eigen::Matrix<double, 8, 8> scalar_mass(const Hex8Geometry& g, const Material& mat) {
  Eigen::Matrix<double, 8, 8> m = Eigen::Matrix<double, 8, 8>::Zero();
  Matrix38 grad;
  for (const auto& gp : gauss_2x2x2()) {
    const double det = physical_gradient(g, gp.xi, grad);
    const auto n = shape(gp.xi);
    m.noalias() += (mat.density * det * gp.weight) * (n * n.transpose());
  }
  return m;
}

}  // namespace

void Material::validate() const {
  if (!(young_modulus > 0.0)) throw Error(Errc::InvalidMaterial, "young_modulus must be > 0");
  if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5)) {
    throw Error(Errc::InvalidMaterial, "poisson_ratio must lie in [0, 0.5)");
  }
  if (!(density > 0.0)) throw Error(Errc::InvalidMaterial, "density must be > 0");
}

Hex8Geometry Hex8Geometry::box(const Point& origin, const Point& size) {
  Hex8Geometry g;
  for (int a = 0; a < 8; ++a) {
    g.corners[static_cast<std::size_t>(a)] =
        origin + Point(0.5 * (1 + kXi[a]) * size.x(), 0.5 * (1 + kEta[a]) * size.y(),
                       0.5 * (1 + kZeta[a]) * size.z());
  }
  return g;
}

SymMatrix hex8_stiffness(const Hex8Geometry& g, const Material& mat) {
  mat.validate();
  const Matrix66 d = isotropic_elasticity(mat);
  Eigen::Matrix<double, 24, 24> k = Eigen::Matrix<double, 24, 24>::Zero();
  Matrix38 grad;
  for (const auto& gp : gauss_2x2x2()) {
    const double det = physical_gradient(g, gp.xi, grad);
    const Matrix6x24 b = strain_operator(grad);
    k.noalias() += (det * gp.weight) * (b.transpose() * d * b);
  }
  return SymMatrix(k);
}

SymMatrix hex8_consistent_mass(const Hex8Geometry& g, const Material& mat) {
  mat.validate();
  const auto m8 = scalar_mass(g, mat);
  Matrix m = Matrix::Zero(24, 24);
  for (int c = 0; c < 3; ++c) m.block(8 * c, 8 * c, 8, 8) = m8;
  return SymMatrix(m);
}

double hex8_element_mass(const Hex8Geometry& g, const Material& mat) {
  mat.validate();
  double total = 0.0;
  Matrix38 grad;
  for (const auto& gp : gauss_2x2x2()) {
    total += mat.density * physical_gradient(g, gp.xi, grad) * gp.weight;
  }
  return total;
}

SymMatrix lump_row_sum(const SymMatrix& consistent) {
  const Vector d = consistent.dense().rowwise().sum();
  for (Index i = 0; i < d.size(); ++i) {
    if (!(d(i) > 0.0)) {
      throw Error(Errc::NegativeLumpedEntry,
                  "row-sum entry " + std::to_string(i) + " is " + std::to_string(d(i)),
                  static_cast<std::size_t>(i));
    }
  }
  return SymMatrix::diagonal(d);
}

SymMatrix lump_hrz(const SymMatrix& consistent) {
  const Index m = consistent.order();
  if (m % 3 != 0) throw Error(Errc::DimensionMismatch, "HRZ lumping expects 3 components");
  const Index nodes = m / 3;
  const Matrix& a = consistent.dense();
  Vector d = a.diagonal();
  for (Index c = 0; c < 3; ++c) {
    const double total = a.block(c * nodes, c * nodes, nodes, nodes).sum();
    const double trace = d.segment(c * nodes, nodes).sum();
    if (!(trace > 0.0)) throw Error(Errc::NegativeLumpedEntry, "nonpositive diagonal trace");
    d.segment(c * nodes, nodes) *= total / trace;
  }
  return SymMatrix::diagonal(d);
}

}  // namespace msl::fem
