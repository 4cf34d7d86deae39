// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace panoweave {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Image, mask or map sizes disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A numeric argument is outside its documented domain.
class ParameterError : public Error {
public:
    using Error::Error;
};

class InvalidTranslation : public ParameterError {
public:
    using ParameterError::ParameterError;
};

/// Operation called on a canvas kind it does not support (e.g. spherical commit on a planar strip).
class UnsupportedKind : public Error {
public:
    using Error::Error;
};

class MissingStats : public Error {
public:
    using Error::Error;
};

/// A step referenced a view that has not been generated yet. Always a plan ordering bug.
class SequencingError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// The inpainter changed pixels it was told to keep.
class ContractViolation : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class BackendError : public Error {
public:
    using Error::Error;
};

class TransportError : public BackendError {
public:
    using BackendError::BackendError;
};

class ServiceError : public BackendError {
public:
    ServiceError(int status, std::string body)
        : BackendError("service returned HTTP " + std::to_string(status) + ": " + body),
          status_(status),
          body_(std::move(body)) {}

    int status() const noexcept { return status_; }
    const std::string& body() const noexcept { return body_; }

private:
    int status_;
    std::string body_;
};

class ProtocolError : public BackendError {
public:
    using BackendError::BackendError;
};

/// Wraps any failure inside a pipeline step; the original exception is nested.
class StepError : public Error {
public:
    explicit StepError(const std::string& step_label)
        : Error("step " + step_label + " failed"), step_label_(step_label) {}

    const std::string& step_label() const noexcept { return step_label_; }

private:
    std::string step_label_;
};

}  // namespace panoweave
