#ifndef HVB_ERRORS_HPP
#define HVB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hvb {

// Malformed or inconsistent input: bad field spec, non-commuting generators,
// mismatched shapes, unknown schema version.  CLI maps this to exit code 1.
struct input_error : std::runtime_error {
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// Structurally valid input outside a supported regime (e.g. Ext request in
// positive characteristic, module data on a non-rational orbit).  Exit code 2.
struct regime_error : std::runtime_error {
    explicit regime_error(const std::string& what) : std::runtime_error(what) {}
};

// The decomposition engine exhausted every splitting and certification
// strategy without reaching a verdict.  Never used to mask a wrong answer:
// callers see an error, not a silently unverified decomposition.
struct inconclusive_error : std::runtime_error {
    explicit inconclusive_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace hvb

#endif
