#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace s2lpp {

/// Base of every error thrown by the library. The three direct subclasses
/// map onto the CLI exit codes: UsageError -> 2, DataError -> 3,
/// BackendError -> 4 (anything else -> 1).
class Error : public std::runtime_error {
public:
    explicit Error(std::string msg) : std::runtime_error(std::move(msg)) {}
};

class UsageError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class BackendError : public Error {
public:
    using Error::Error;
};

// ---- data errors -----------------------------------------------------------

class FileNotFoundError : public DataError {
public:
    explicit FileNotFoundError(const std::string& path)
        : DataError("file not found: " + path), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// A file parsed but a record violated the expected schema. Carries the
/// 1-based line number (0 when the problem is not line-addressable) and the
/// offending field name when known.
class SchemaError : public DataError {
public:
    SchemaError(const std::string& path, std::size_t line, const std::string& field,
                const std::string& detail)
        : DataError(path + (line > 0 ? ":" + std::to_string(line) : "") +
                    (field.empty() ? "" : " field '" + field + "'") + ": " + detail),
          path_(path),
          line_(line),
          field_(field) {}
    const std::string& path() const { return path_; }
    std::size_t line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    std::string path_;
    std::size_t line_;
    std::string field_;
};

class DatasetTooSmallError : public DataError {
public:
    DatasetTooSmallError(std::size_t have, std::size_t need)
        : DataError("dataset has " + std::to_string(have) + " samples, need at least " +
                    std::to_string(need)) {}
};

class EmptyInputError : public DataError {
public:
    using DataError::DataError;
};

class SlotMismatchError : public DataError {
public:
    using DataError::DataError;
};

class PoolTooSmallError : public DataError {
public:
    using DataError::DataError;
};

class EmptyDocumentsError : public DataError {
public:
    using DataError::DataError;
};

class MissingCellError : public DataError {
public:
    using DataError::DataError;
};

/// Two models were compared over different relation sets. Lists the
/// relations that one side covers and the other does not.
class CoverageMismatchError : public DataError {
public:
    explicit CoverageMismatchError(std::string msg, std::vector<std::string> uncovered = {})
        : DataError(std::move(msg)), uncovered_(std::move(uncovered)) {}
    const std::vector<std::string>& uncovered() const { return uncovered_; }

private:
    std::vector<std::string> uncovered_;
};

class ZeroOracleError : public DataError {
public:
    ZeroOracleError() : DataError("oracle accuracy is zero; RRoP undefined") {}
};

class CacheIoError : public DataError {
public:
    using DataError::DataError;
};

// ---- backend errors --------------------------------------------------------

class EndpointUnknownError : public BackendError {
public:
    explicit EndpointUnknownError(const std::string& id)
        : BackendError("unknown endpoint: " + id) {}
};

class CredentialMissingError : public BackendError {
public:
    explicit CredentialMissingError(const std::string& env_var)
        : BackendError("credential environment variable not set: " + env_var) {}
};

/// All retry attempts were used up. Carries the last HTTP status seen
/// (0 for pure transport failures such as connection refused or timeout).
class ExhaustedRetriesError : public BackendError {
public:
    ExhaustedRetriesError(int attempts, int last_status, const std::string& detail)
        : BackendError("exhausted " + std::to_string(attempts) + " attempts (last status " +
                       std::to_string(last_status) + "): " + detail),
          last_status_(last_status),
          attempts_(attempts) {}
    int last_status() const { return last_status_; }
    int attempts() const { return attempts_; }

private:
    int last_status_;
    int attempts_;
};

class MalformedReplyError : public BackendError {
public:
    using BackendError::BackendError;
};

/// Non-transient HTTP failure (4xx other than 429); never retried.
class HttpStatusError : public BackendError {
public:
    HttpStatusError(int status, const std::string& body_excerpt)
        : BackendError("http status " + std::to_string(status) +
                       (body_excerpt.empty() ? "" : ": " + body_excerpt)),
          status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

/// A scripted rule with fail=true matched; models a permanent scripted
/// failure in tests.
class ScriptedFailureError : public BackendError {
public:
    using BackendError::BackendError;
};

class GenerationParseError : public BackendError {
public:
    using BackendError::BackendError;
};

/// Exit code the CLI uses for a given error, per the documented contract.
inline int exit_code_for(const Error& e) {
    if (dynamic_cast<const UsageError*>(&e)) return 2;
    if (dynamic_cast<const DataError*>(&e)) return 3;
    if (dynamic_cast<const BackendError*>(&e)) return 4;
    return 1;
}

}  // namespace s2lpp
