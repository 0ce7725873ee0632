#pragma once

#include <stdexcept>
#include <string>

namespace arc {

// Every failure the library reports, as a closed set. The C API maps these
// one-to-one onto arc_status codes.
enum class errc {
  ok = 0,
  // task parsing / serialization
  malformed_json,
  schema_violation,
  value_out_of_range,
  ragged_grid,
  empty_grid,
  // grid views
  no_such_separator,
  out_of_bounds,
  // instruction language
  unknown_primitive,
  bad_arity,
  bad_argument_type,
  empty_program,
  selector_unresolved,
  geometry_error,
  // llm / memory / harness
  backend_error,
  dimension_mismatch,
  duplicate_id,
  no_survivor,
  dataset_not_found,
  io_error,
  precondition,
};

const char* errc_name(errc code);

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
  throw error(code, message);
}

}  // namespace arc
