#pragma once

#include <stdexcept>
#include <string>

namespace hybridlg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A post-selection or POVM outcome has (numerically) zero probability, so the
/// conditional state does not exist.
class DegenerateState : public Error {
public:
    using Error::Error;
};

/// A number-basis truncation is too small for the requested state.
class CutoffTooSmall : public Error {
public:
    using Error::Error;
};

class IndexOrder : public Error {
public:
    using Error::Error;
};

class EmptyGrid : public Error {
public:
    using Error::Error;
};

/// The ancilla reset constraint cannot be met for this parameter point.
class NoSolution : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// An integrator step is too coarse for the requested accuracy or stability.
class StepTooLarge : public Error {
public:
    using Error::Error;
};

class EmptyEnsemble : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace hybridlg
