#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fogbandit {

// Stable identifier of one fog node (bandit arm).
using ArmId = std::int64_t;

// Violated precondition of a library operation.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Invalid scenario / experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file. line() is 1-based, 0 when not line-specific.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

inline void require(bool cond, const char* msg)
{
    if (!cond)
        throw ContractError(msg);
}

inline void require(bool cond, const std::string& msg)
{
    if (!cond)
        throw ContractError(msg);
}

} // namespace fogbandit
