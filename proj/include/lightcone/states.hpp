#pragma once

// Boundary covariance pairs (lambda+, lambda-): the gauge-generator family,
// the pure family, the vacuum-like multiplier pair, Bogoliubov transforms and
// the verification checks.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "lightcone/symcalc.hpp"

namespace lightcone::states {

using json = nlohmann::json;
using symcalc::BoundaryOperator;
using symcalc::DecayProfile;
using boundary::GridPtr;

// Admissible modes carrying generator weight, split by frequency sign.
struct Sectors {
    std::vector<int> plus, minus;
    std::vector<int> all() const { return symcalc::merge_sets(plus, minus); }
};

// Per-mode envelope exp(-(sigma/sigma0)^2) exp(-(l/l0)^2); defaults sigma_max/4, L/2.
struct GeneratorSpec {
    int rank = 4;
    double sigma0 = -1.0;
    double ell0 = -1.0;
    double cut = 1e-16;  // modes with smaller envelope are left out of the active set
    double sv_lo = 0.5;
    double sv_hi = 2.0;
};

Vec generator_envelope(const boundary::BoundaryGrid& g, const GeneratorSpec& spec);
Sectors active_sectors(const boundary::BoundaryGrid& g, const GeneratorSpec& spec);

struct GaugeGenerators {
    GridPtr grid;
    Sectors sectors;
    CMat a_plus;   // plus x plus
    CMat a_minus;  // minus x minus
    CMat d;        // plus x minus
};

struct PurityGenerator {
    GridPtr grid;
    Sectors sectors;
    CMat a;  // minus x plus
};

// d maps the range of a_minus into the range of a_plus with norm d_norm; the
// singular values of a_minus lie in [2, 4] so that any norm above one shows
// up as a negative direction.
GaugeGenerators random_gauge(const GridPtr& g, std::uint64_t seed, const GeneratorSpec& spec, double d_norm = 0.5);
PurityGenerator random_purity(const GridPtr& g, std::uint64_t seed, const GeneratorSpec& spec);
PurityGenerator zero_purity(const GridPtr& g);

BoundaryOperator as_operator(const PurityGenerator& gen);  // a as a full-space operator
BoundaryOperator as_operator_d(const GaugeGenerators& gen);

struct CovariancePair {
    BoundaryOperator lambda_plus, lambda_minus;
    std::string generator = "custom";  // gauge | pure | moretti | custom
    json meta = json::object();
};

BoundaryOperator two_abs_ds_sqrt(const GridPtr& g);      // (2|D_s|)^{1/2}
BoundaryOperator two_abs_ds_inv_sqrt(const GridPtr& g);  // (2|D_s|)^{-1/2} on admissible modes, 0 elsewhere

CovariancePair pair_from_c_plus(const BoundaryOperator& c_plus, const std::string& generator);
BoundaryOperator c_plus_of(const CovariancePair& p);
BoundaryOperator c_minus_of(const CovariancePair& p);

CovariancePair moretti(const GridPtr& g);
// bypass_norm skips the ||d|| <= 1 precondition, for falsification runs.
CovariancePair build_gauge_covariances(const GaugeGenerators& gen, bool bypass_norm = false);
CovariancePair build_pure_covariances(const PurityGenerator& gen);
// Blocks of c+(a) on the sectors; the square root goes through operator_function.
BoundaryOperator pure_c_plus(const PurityGenerator& gen);

double verify_ccr(const CovariancePair& p);

struct PositivityReport {
    double min_plus = 0.0, min_minus = 0.0;
    double norm_plus = 0.0, norm_minus = 0.0;
    bool pass = false;
    json to_json() const;
};
PositivityReport verify_positivity(const CovariancePair& p);

struct MuscReport {
    DecayProfile minus_c_plus, plus_c_minus, c_plus_rest, c_minus_rest;
    bool pass = false;
    json to_json() const;
};
MuscReport verify_musc(const CovariancePair& p, int N_max = 4, double factor = 1.5);

struct PurityReport {
    bool pass = false;
    double reconstruction = 0.0;  // ||c - c(a_hat)|| / ||c||
    double involution = 0.0;      // ||P^2 - 1||
    Sectors sectors;
    CMat a_hat;
    json to_json() const;
};
PurityReport purity_check(const CovariancePair& p);

BoundaryOperator bogoliubov(const PurityGenerator& gen);
PurityGenerator negated(const PurityGenerator& gen);

struct BogoliubovReport {
    double inverse_residual = 0.0;    // ||u(a) u(-a) - 1||
    double conjugation_residual = 0.0;  // ||u(a)* c+(0) u(a) - c+(a)||
    json to_json() const;
};
BogoliubovReport check_bogoliubov(const PurityGenerator& gen);

double one_particle_norm(const CovariancePair& p, const boundary::BoundaryFunction& g);
struct Equivalence {
    double lower = 0.0, upper = 0.0;
};
// Ratios of the one-particle norm to ||(2|D_s|)^{1/2} g|| over probes.
Equivalence one_particle_equivalence(const CovariancePair& p, const std::vector<boundary::BoundaryFunction>& probes);

// Conjugates the pair by the shift operator U(b).
CovariancePair conjugate_pair(const CovariancePair& p, const Vec& b_coeffs);

struct PairReport {
    double ccr = 0.0;
    PositivityReport positivity;
    MuscReport musc;
    PurityReport purity;
    bool ccr_pass = false;
    json to_json() const;
};
PairReport verify_all(const CovariancePair& p, int N_max = 4, double factor = 1.5);

void save_pair(const std::string& path, const CovariancePair& p);
CovariancePair load_pair(const std::string& path);

}  // namespace lightcone::states
