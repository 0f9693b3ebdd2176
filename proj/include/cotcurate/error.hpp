#pragma once

#include <stdexcept>
#include <string>

namespace cotcurate {

// Process exit codes shared by every CLI subcommand.
enum class ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kIo = 2,
    kEndpoint = 3,
    kDataContract = 4,
};

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }
    const char* kind() const noexcept;

private:
    ExitCode code_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ExitCode::kUsage, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ExitCode::kIo, what) {}
};

// Malformed records, duplicate ids, dangling references, violated preconditions.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ExitCode::kDataContract, what) {}
};

class EndpointError : public Error {
public:
    EndpointError(const std::string& what, int status, int attempts)
        : Error(ExitCode::kEndpoint, what), status_(status), attempts_(attempts) {}

    // HTTP status of the last attempt; 0 for transport failures (timeouts, refused connections).
    int status() const noexcept { return status_; }
    int attempts() const noexcept { return attempts_; }

private:
    int status_;
    int attempts_;
};

inline const char* Error::kind() const noexcept {
    switch (code_) {
        case ExitCode::kOk: return "ok";
        case ExitCode::kUsage: return "usage";
        case ExitCode::kIo: return "io";
        case ExitCode::kEndpoint: return "endpoint";
        case ExitCode::kDataContract: return "data";
    }
    return "unknown";
}

}  // namespace cotcurate
