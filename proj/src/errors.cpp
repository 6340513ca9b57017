#include "pnp/errors.hpp"

#include <sstream>

namespace pnp {

CompatibilityError::CompatibilityError(const std::string& context, double residual)
    : Error([&] {
        std::ostringstream os;
        os.precision(17);
        os << context << ": compatibility residual " << residual;
        return os.str();
      }()),
      residual_(residual) {}

}  // namespace pnp
