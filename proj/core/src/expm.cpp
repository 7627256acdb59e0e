#include "ifv/expm.hpp"

#include "ifv/error.hpp"

#include <Eigen/LU>

#include <array>
#include <cmath>

namespace ifv {

Mat matrix_exponential(const Mat& a) {
  if (a.rows() != a.cols()) throw InvalidInput("matrix_exponential: matrix must be square");
  const auto n = a.rows();
  if (n == 0) return a;
  constexpr std::array<double, 14> b{64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                     1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                     670442572800.0,      33522128640.0,       1323241920.0,
                                     40840800.0,          960960.0,            16380.0,
                                     182.0,               1.0};
  // Backward-error bound of the [13/13] approximant in double precision.
  constexpr double theta13 = 5.371920351148152;

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  if (norm1 == 0.0) return Mat::Identity(n, n);
  int squarings = 0;
  if (norm1 > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  const Mat s = a / std::ldexp(1.0, squarings);

  const Mat id = Mat::Identity(n, n);
  const Mat s2 = s * s;
  const Mat s4 = s2 * s2;
  const Mat s6 = s4 * s2;
  const Mat u = s * (s6 * (b[13] * s6 + b[11] * s4 + b[9] * s2) + b[7] * s6 + b[5] * s4 +
                     b[3] * s2 + b[1] * id);
  const Mat v = s6 * (b[12] * s6 + b[10] * s4 + b[8] * s2) + b[6] * s6 + b[4] * s4 + b[2] * s2 +
                b[0] * id;
  Mat r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

}  // namespace ifv
