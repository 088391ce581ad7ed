#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "msl/linalg.hpp"

namespace msl {

double gershgorin_max(const SymMatrix& m) {
  const Matrix& a = m.dense();
  double best = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < a.rows(); ++i) {
    const double radius = a.col(i).cwiseAbs().sum() - std::abs(a(i, i));
    best = std::max(best, a(i, i) + radius);
  }
  return best;
}

double condition_number(const SymMatrix& m) {
  Vector values;
  if (m.is_diagonal()) {
    values = m.diagonal_entries();
  } else {
    values = sym_eig(m, EigJob::ValuesOnly).values;
  }
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  if (!(lo > 0.0)) {
    throw Error(Errc::NotPositiveDefinite,
                "smallest eigenvalue " + std::to_string(lo) + " is not positive");
  }
  return hi / lo;
}

double pair_condition(const MatrixPair& p) {
  const Vector values = generalized_eig(p, EigJob::ValuesOnly).values;
  const double lo = values(0);
  if (!(lo > 0.0)) {
    throw Error(Errc::NotPositiveDefinite,
                "smallest pair eigenvalue " + std::to_string(lo) + " is not positive");
  }
  return values(values.size() - 1) / lo;
}

}  // namespace msl
