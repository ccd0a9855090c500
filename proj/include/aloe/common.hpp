#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace aloe {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Function class of an objective; selects the stopping rule, the progress
/// measure and the class-specific constants.
enum class FunctionClass { nonconvex, convex, strongly_convex };

std::string_view to_string(FunctionClass c);
FunctionClass parse_function_class(std::string_view name);

/// True when an objective tagged `actual` may be analysed as `requested`
/// (strongly convex implies convex implies nonconvex-smooth).
bool class_admits(FunctionClass actual, FunctionClass requested);

/// Raised when derived constants make a theorem or experiment inapplicable.
class InadmissibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aloe
