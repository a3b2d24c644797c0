#ifndef SECTORIA_ERRORS_HPP
#define SECTORIA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sectoria {

enum class errc {
    parse_error = 1,
    domain_error,
    unsupported_case,
    numeric_failure,
    precision_error,
    conditioning_error,
    hypothesis_violation,
    ill_posed_chart,
    path_construction,
    integration_failure,
};

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    errc code() const { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

} // namespace sectoria

#endif
