#pragma once

#include <stdexcept>
#include <string>

namespace nsexp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class NotDivergenceFree : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class SupportError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class DegreeCapExceeded : public Error {
public:
    using Error::Error;
};

class MissingResonantData : public Error {
public:
    using Error::Error;
};

class MissingLevels : public Error {
public:
    using Error::Error;
};

class SolverDivergence : public Error {
public:
    using Error::Error;
};

class TooFewSamples : public Error {
public:
    using Error::Error;
};

class NotAnEigenvalue : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

}  // namespace nsexp
