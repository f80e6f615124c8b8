#pragma once

#include <stdexcept>
#include <string>

namespace histofeat {

// Exit-code categories used by the CLI: 2 config, 3 data, 4 numerical.
enum class ErrorCategory { Config = 2, Data = 3, Numerical = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory cat, const std::string& msg)
        : std::runtime_error(msg), category_(cat) {}
    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

#define HISTOFEAT_DEFINE_ERROR(Name, Cat)                          \
    class Name : public Error {                                    \
    public:                                                        \
        explicit Name(const std::string& msg)                      \
            : Error(ErrorCategory::Cat, std::string(#Name ": ") + msg) {} \
    }

HISTOFEAT_DEFINE_ERROR(ConfigError, Config);
HISTOFEAT_DEFINE_ERROR(InvalidInput, Data);
HISTOFEAT_DEFINE_ERROR(InsufficientTissue, Data);
HISTOFEAT_DEFINE_ERROR(DegenerateStains, Data);
HISTOFEAT_DEFINE_ERROR(InvalidDataset, Data);
HISTOFEAT_DEFINE_ERROR(InvalidTarget, Data);
HISTOFEAT_DEFINE_ERROR(InvalidPlan, Data);
HISTOFEAT_DEFINE_ERROR(EmptyPatient, Data);
HISTOFEAT_DEFINE_ERROR(ShapeError, Data);
HISTOFEAT_DEFINE_ERROR(IoError, Data);
HISTOFEAT_DEFINE_ERROR(NumericalError, Numerical);

#undef HISTOFEAT_DEFINE_ERROR

// Per-item failure that carries the offending path.
class ItemError : public Error {
public:
    ItemError(const std::string& path, const std::string& msg)
        : Error(ErrorCategory::Data, "ItemError: " + path + ": " + msg), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace histofeat
