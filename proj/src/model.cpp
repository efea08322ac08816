#include "ness/model.hpp"

#include <cmath>
#include <sstream>

#include "ness/errors.hpp"

namespace ness {

namespace {

void require(bool ok, const char* what, double value) {
  if (!ok) {
    std::ostringstream msg;
    msg << "invalid model parameter: " << what << " (got " << value << ")";
    throw ParameterError(msg.str());
  }
}

}  // namespace

void ModelParams::validate() const {
  require(std::isfinite(z1) && std::abs(z1) <= 1.0, "z1 must lie in [-1, 1]", z1);
  require(std::isfinite(z2) && std::abs(z2) <= 1.0, "z2 must lie in [-1, 1]", z2);
  require(std::isfinite(gamma1) && gamma1 > 0.0, "gamma1 must be > 0", gamma1);
  require(std::isfinite(gamma2) && gamma2 > 0.0, "gamma2 must be > 0", gamma2);
  require(std::isfinite(upsilon1) && upsilon1 >= 0.0, "upsilon1 must be >= 0", upsilon1);
  require(std::isfinite(upsilon2) && upsilon2 >= 0.0, "upsilon2 must be >= 0", upsilon2);
  require(std::isfinite(p) && p >= 0.0 && p <= 1.0, "p must lie in [0, 1]", p);
  require(std::isfinite(omega) && omega > 0.0, "omega must be > 0", omega);
  require(std::isfinite(Omega) && Omega > 0.0, "Omega must be > 0", Omega);
}

std::string ModelParams::describe() const {
  std::ostringstream s;
  s << "z=(" << z1 << ", " << z2 << ") gamma=(" << gamma1 << ", " << gamma2 << ") upsilon=(" << upsilon1
    << ", " << upsilon2 << ") p=" << p;
  return s.str();
}

}  // namespace ness
