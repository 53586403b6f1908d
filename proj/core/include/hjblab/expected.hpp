#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace hjb {

enum class ErrorCode {
    InvalidArgument,
    BlowUp,
    TailNotCertifiable,
    NonConvex,
    Stability,
    BoundaryMargin,
    WindowTooSmall,
    OutOfDomain,
    NotConverged,
    Parse,
    Io,
};

const char* to_string(ErrorCode code) noexcept;

/// Failure description carried by Expected. Blow-up failures keep the
/// explosion time so callers can report it instead of losing it.
struct Error {
    ErrorCode code = ErrorCode::InvalidArgument;
    std::string message;
    std::optional<double> blowup_time;

    [[nodiscard]] std::string describe() const;
};

class BadExpectedAccess : public std::runtime_error {
public:
    explicit BadExpectedAccess(Error err)
        : std::runtime_error(err.describe()), error_(std::move(err)) {}
    [[nodiscard]] const Error& error() const noexcept { return error_; }

private:
    Error error_;
};

struct Unexpected {
    Error error;
};

inline Unexpected unexpected(ErrorCode code, std::string message) {
    return Unexpected{Error{code, std::move(message), std::nullopt}};
}

inline Unexpected unexpected(Error err) { return Unexpected{std::move(err)}; }

/// Minimal value-or-error holder (std::expected is C++23).
template <typename T>
class Expected {
public:
    Expected(T value) : storage_(std::in_place_index<0>, std::move(value)) {}
    Expected(Unexpected u) : storage_(std::in_place_index<1>, std::move(u.error)) {}

    [[nodiscard]] bool has_value() const noexcept { return storage_.index() == 0; }
    explicit operator bool() const noexcept { return has_value(); }

    [[nodiscard]] const T& value() const& {
        if (!has_value()) throw BadExpectedAccess(std::get<1>(storage_));
        return std::get<0>(storage_);
    }
    [[nodiscard]] T& value() & {
        if (!has_value()) throw BadExpectedAccess(std::get<1>(storage_));
        return std::get<0>(storage_);
    }
    [[nodiscard]] T&& value() && {
        if (!has_value()) throw BadExpectedAccess(std::get<1>(storage_));
        return std::get<0>(std::move(storage_));
    }

    [[nodiscard]] const Error& error() const& { return std::get<1>(storage_); }

    const T& operator*() const& { return value(); }
    T& operator*() & { return value(); }
    const T* operator->() const { return &value(); }
    T* operator->() { return &value(); }

private:
    std::variant<T, Error> storage_;
};

/// Void specialisation: success carries nothing.
template <>
class Expected<void> {
public:
    Expected() = default;
    Expected(Unexpected u) : error_(std::move(u.error)) {}

    [[nodiscard]] bool has_value() const noexcept { return !error_.has_value(); }
    explicit operator bool() const noexcept { return has_value(); }
    void value() const {
        if (error_) throw BadExpectedAccess(*error_);
    }
    [[nodiscard]] const Error& error() const { return *error_; }

private:
    std::optional<Error> error_;
};

}  // namespace hjb
