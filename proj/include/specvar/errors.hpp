#pragma once

#include <stdexcept>
#include <string>

namespace specvar {

// Base class for every failure this library reports deliberately.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// linalg
struct NotPositiveDefinite final : Error { using Error::Error; };
struct NoSignChange final : Error { using Error::Error; };
struct ConvergenceFailure final : Error { using Error::Error; };

// fourier algebra
struct DomainMismatch final : Error { using Error::Error; };
struct BasisNotOrthonormal final : Error { using Error::Error; };

// spectra
struct InvalidModuli final : Error { using Error::Error; };
struct MultiplicityNotTwo final : Error { using Error::Error; };
struct NotBelowT1 final : Error { using Error::Error; };

// second variation engine
struct IncompleteSpectrum final : Error { using Error::Error; };
struct NotAdmissible final : Error { using Error::Error; };
struct DegenerateGap final : Error { using Error::Error; };

// verifier
struct InsufficientSamples final : Error { using Error::Error; };

// input files (perturbation and sweep specs)
struct SpecParseError final : Error { using Error::Error; };

} // namespace specvar
