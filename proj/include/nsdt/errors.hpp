#pragma once

#include <stdexcept>
#include <string>

namespace nsdt {

struct EvaluationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SpecParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ChartSingularity : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateVertical : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularMetric : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PatternViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IndecomposableInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InfeasibleDegree : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotSelfDual : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotBasic : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InconsistentEta : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ZeroEta : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StepLimitExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nsdt
