#ifndef NETCHOICE_ERRORS_HPP
#define NETCHOICE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace netchoice {

// Error categories shared across the library. The CLI prints them as
// "<code>: <message>" on a single line and exits nonzero.
enum class ErrorCode {
  Schema,      // malformed or inconsistent input files
  Config,      // invalid model/objective configuration
  Split,       // chooser split cannot be formed
  Argument,    // bad function argument
  Divergence,  // non-finite objective during training
  Scenario,    // counterfactual scenario produced an invalid state
  Generation,  // random generation failed (e.g. connectivity resampling cap)
  Io,          // file not readable/writable
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }
  const char* code_name() const { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Schema: return "schema_error";
    case ErrorCode::Config: return "config_error";
    case ErrorCode::Split: return "split_error";
    case ErrorCode::Argument: return "argument_error";
    case ErrorCode::Divergence: return "divergence_error";
    case ErrorCode::Scenario: return "scenario_error";
    case ErrorCode::Generation: return "generation_error";
    case ErrorCode::Io: return "io_error";
  }
  return "error";
}

}  // namespace netchoice

#endif  // NETCHOICE_ERRORS_HPP
