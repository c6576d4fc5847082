#pragma once

#include <stdexcept>
#include <string>

namespace asc {

// All recoverable failures are thrown as Error with a kind tag. The CLI
// maps kinds onto its exit-code taxonomy (io -> 3, everything else -> 4).
class Error : public std::runtime_error {
public:
    enum class Kind {
        io,           // file unreadable/unwritable
        not_found,    // missing file or directory
        format,       // malformed container (WAV/feature/checkpoint header)
        unsupported,  // valid container, unsupported variant
        parse,        // malformed text input (meta.txt, CLI values)
        parameter,    // bad argument value
        shape,        // dimension mismatch
        state,        // operation called in the wrong state (e.g. no cache)
        config,       // inconsistent configuration
        empty_input,  // empty collection where at least one element is required
    };

    Error(Kind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    Kind kind() const { return kind_; }

    bool is_io() const { return kind_ == Kind::io || kind_ == Kind::not_found; }

private:
    Kind kind_;
};

inline Error io_error(std::string m) { return {Error::Kind::io, std::move(m)}; }
inline Error not_found_error(std::string m) { return {Error::Kind::not_found, std::move(m)}; }
inline Error format_error(std::string m) { return {Error::Kind::format, std::move(m)}; }
inline Error unsupported_error(std::string m) { return {Error::Kind::unsupported, std::move(m)}; }
inline Error parse_error(std::string m) { return {Error::Kind::parse, std::move(m)}; }
inline Error parameter_error(std::string m) { return {Error::Kind::parameter, std::move(m)}; }
inline Error shape_error(std::string m) { return {Error::Kind::shape, std::move(m)}; }
inline Error state_error(std::string m) { return {Error::Kind::state, std::move(m)}; }
inline Error config_error(std::string m) { return {Error::Kind::config, std::move(m)}; }
inline Error empty_input_error(std::string m) { return {Error::Kind::empty_input, std::move(m)}; }

}  // namespace asc
