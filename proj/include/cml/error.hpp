#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cml/lattice.hpp"

namespace cml {

// Base for every failure raised by the library. Callers that only care about
// "the experiment could not run" catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidSpec : public Error {
public:
    using Error::Error;
};

class DanglingInput : public Error {
public:
    using Error::Error;
};

class MissingInput : public Error {
public:
    using Error::Error;
};

class CycleDetected : public Error {
public:
    CycleDetected(std::string what, std::vector<Site> witness)
        : Error(std::move(what)), witness_(std::move(witness)) {}

    const std::vector<Site>& witness() const noexcept { return witness_; }

private:
    std::vector<Site> witness_;
};

class NotInvertible : public Error {
public:
    using Error::Error;
};

// A probe's mathematical precondition (e.g. Lambda_I * Lambda_T < 1) fails.
class ConditionViolated : public Error {
public:
    using Error::Error;
};

class ExpansionConditionViolated : public ConditionViolated {
public:
    using ConditionViolated::ConditionViolated;
};

class NotPeriodicPoint : public ConditionViolated {
public:
    using ConditionViolated::ConditionViolated;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class InsufficientSamples : public Error {
public:
    using Error::Error;
};

class EmptySamples : public Error {
public:
    using Error::Error;
};

class Degenerate : public Error {
public:
    using Error::Error;
};

}  // namespace cml
