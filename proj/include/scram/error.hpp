#pragma once

#include <stdexcept>
#include <string>

namespace scram {

/// Base class for every failure the library reports. The CLI maps these to
/// exit status 1; UsageError maps to 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

/// Malformed markup, bad header, handler failure. The message already
/// carries the source location.
class ParseError : public Error {
public:
    using Error::Error;
};

class UrlError : public Error {
public:
    using Error::Error;
};

class FetchError : public Error {
public:
    using Error::Error;
};

class ActivationError : public Error {
public:
    using Error::Error;
};

class ResolutionError : public Error {
public:
    using Error::Error;
};

class AreaError : public Error {
public:
    using Error::Error;
};

class RuntimeEnvError : public Error {
public:
    using Error::Error;
};

} // namespace scram
