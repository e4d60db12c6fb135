#pragma once

#include <stdexcept>
#include <string>

namespace lightcone {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "Error"; }
};

#define LIGHTCONE_ERROR(Name)                                              \
    struct Name : Error {                                                  \
        using Error::Error;                                                \
        const char* kind() const noexcept override { return #Name; }       \
    }

// geometry
LIGHTCONE_ERROR(NonVanishingGradientOnCone);
LIGHTCONE_ERROR(HessianMismatch);
LIGHTCONE_ERROR(GeneratorEscapedChart);
LIGHTCONE_ERROR(DegenerateGenerator);
LIGHTCONE_ERROR(SingularInducedMetric);
LIGHTCONE_ERROR(NoRoot);
LIGHTCONE_ERROR(MultipleRoots);
LIGHTCONE_ERROR(WindowTooShort);

// boundary
LIGHTCONE_ERROR(GridMismatch);
LIGHTCONE_ERROR(SupportViolation);
LIGHTCONE_ERROR(DimensionTooLow);
LIGHTCONE_ERROR(AliasingWarning);

// symcalc
LIGHTCONE_ERROR(NonHermitian);
LIGHTCONE_ERROR(FunctionalCalculusFailure);

// states
LIGHTCONE_ERROR(NormViolation);
LIGHTCONE_ERROR(NegativeBlock);

// bulk
LIGHTCONE_ERROR(CourantViolation);
LIGHTCONE_ERROR(UnstableGrowth);
LIGHTCONE_ERROR(SupportLeak);
LIGHTCONE_ERROR(InterpolationOutOfBounds);
LIGHTCONE_ERROR(RankDeficient);
LIGHTCONE_ERROR(NonPositiveOmega);

// io / cli
LIGHTCONE_ERROR(FormatError);
LIGHTCONE_ERROR(ConfigError);

#undef LIGHTCONE_ERROR

}  // namespace lightcone
