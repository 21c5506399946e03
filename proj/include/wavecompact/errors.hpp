#pragma once

#include <stdexcept>
#include <string>

namespace wavecompact
{

//! Base class of every exception thrown by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

//! Invalid user input: mesh parameters, descriptors, experiment configuration.
class ConfigError : public Error
{
public:
    using Error::Error;
};

//! A caller broke a documented precondition.
class ContractViolation : public Error
{
public:
    using Error::Error;
};

//! The mesh violates a^2 tau^2 <= (1 - eps0^2/2) h^2.
class StabilityError : public Error
{
public:
    using Error::Error;
};

//! The mesh is too coarse to host the requested frequency.
class MeshTooCoarse : public StabilityError
{
public:
    MeshTooCoarse(const std::string& what, int minimal_n)
        : StabilityError(what), minimal_n_(minimal_n)
    {
    }

    int minimal_n() const noexcept { return minimal_n_; }

private:
    int minimal_n_;
};

//! Adaptive quadrature did not settle on a cell.
class NumericIntegrationError : public Error
{
public:
    NumericIntegrationError(const std::string& what, int cell)
        : Error(what + " (cell " + std::to_string(cell) + ")"), cell_(cell)
    {
    }

    int cell() const noexcept { return cell_; }

private:
    int cell_;
};

//! Something the theory guarantees did not hold; indicates a bug.
class InternalInvariantError : public Error
{
public:
    using Error::Error;
};

namespace detail
{
inline void require(bool condition, const std::string& message)
{
    if (!condition)
    {
        throw ContractViolation(message);
    }
}
}  // namespace detail

}  // namespace wavecompact
