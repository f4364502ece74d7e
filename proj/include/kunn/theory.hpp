#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kunn/ctensor.hpp"
#include "kunn/generator.hpp"
#include "kunn/linalg.hpp"
#include "kunn/scene.hpp"
#include "kunn/tensor.hpp"

namespace kunn {

/// Orthonormal row- and column-space bases of a lifted spectrum difference.
struct SubspaceBasis {
    CMat u;             // ambient_rows x r, orthonormal columns
    CMat v;             // ambient_cols x r, orthonormal columns
    std::string source; // which lifted difference produced the pair
};

/// Lifts dz to its wrap-around Hankel form with a d x d window and keeps the
/// singular directions above tol_rel of the largest singular value.
SubspaceBasis hankel_subspaces(const CTensor& dz, std::size_t d, std::string source,
                               double tol_rel = 1e-6);

/// mu(U) = (n/r) * max_i ||row_i(U)||^2 for an orthonormal n x r basis; the
/// i-th row norm equals ||P_U e_i||, so the value lies in [1, n/r].  Throws
/// when the Gram residual ||U^H U - I||_max exceeds 1e-8.
double coherence(const CMat& u);

/// Forward oracle with the coil and phase kernels decoded once from the
/// trained parameters; candidate spectrum latents then evaluate through
/// direct circular convolutions with fixed kernels.  The generator must
/// outlive the oracle.
class GeneratorOracle {
public:
    explicit GeneratorOracle(const TripledGenerator& gen);

    /// Scaled spectrum decoder output as an [N, N] complex grid.
    CTensor spectrum(const Tensor* latent_z = nullptr) const;

    /// Both measurement branches stacked as [copies*Nc, N, N] with the
    /// plain-coil branch first; copies is 2 with the phase module on.
    CTensor output_stack(const Tensor* latent_z = nullptr) const;

    std::size_t copies() const { return phase_ ? 2 : 1; }

private:
    const TripledGenerator* gen_;
    CTensor csm_; // [Nc, kh, kw]; the 1x1 delta with the coil module off
    CTensor e2_;  // [kh, kw]; empty with the phase module off
    bool phase_ = false;
};

/// Numeric ranks of lifted spectrum differences over random latent pairs.
struct RankProbe {
    std::size_t max_rank = 0;
    std::size_t structural_bound = 0;   // min(N*N, d*d)
    std::vector<std::size_t> ranks;     // one per trial
};

/// Draws spectrum latent pairs inside the ball of radius s, lifts each
/// decoded difference with a d x d window, and records the numeric ranks.
RankProbe assumption1_check(const TrainedGenerator& t, std::size_t d, std::size_t trials,
                            double s, std::uint64_t seed = 1);

/// Sampling-number bound; log is the natural logarithm throughout.  The
/// formula is kept exactly as stated even though it can go negative, so a
/// nonpositive value flags the configuration as vacuous downstream.
struct C1Bound {
    double c1 = 0.0;            // sqrt(16 n mu0 r (N+d) beta log d / (3 N^2)) - n/N
    double n_required = 0.0;    // 5.34 mu0 r (N+d) beta log d
    bool condition_met = false; // n > n_required
};

/// n_samples may be zero (both terms vanish); ambient, mu0, r must be
/// positive, beta > 1, and d > 1 (the log degenerates otherwise).
C1Bound c1_bound(double n_samples, double mu0, double r, double ambient, double d,
                 double beta = 1.1);

/// Masked-to-unmasked Frobenius ratio statistics over generator output
/// differences that vary only in the spectrum latent.
struct Lemma1Result {
    double min_ratio = 0.0;     // empirical c over the kept trials
    double pass_fraction = 0.0; // ratio >= c1 among kept trials; 1 when c1 <= 0
    std::size_t kept = 0;
    std::size_t skipped = 0;    // degenerate differences, ||dG||_F < 1e-12
    std::vector<double> ratios; // per kept trial, trial order
};

/// Per trial draws a fresh latent pair in the ball of radius s and measures
/// ||M dG||_F / ||dG||_F on the scene's mask.
Lemma1Result lemma1_verify(const TrainedGenerator& t, const AcquisitionScene& scene,
                           std::size_t trials, double s, std::uint64_t seed = 1,
                           double c1 = 0.0);

/// rhs = proj + (2 masked + 4 noise) / c; +inf when c <= 0.  Non-decreasing
/// in every norm argument and non-increasing in c.
double theorem_rhs(double proj_dist, double masked_dist, double noise_norm, double c);

/// One recovery-bound evaluation against a freshly drawn (or fixed
/// deterministic) mask.
struct BoundTrial {
    std::uint64_t mask_seed = 0;
    std::size_t n_samples = 0;
    double lhs = 0.0;         // ||G(trained) - X*||_F
    double proj_dist = 0.0;   // ||Xt - X*||_F for the searched Xt
    double masked_dist = 0.0; // ||M(Xt - X*)||_F
    double noise_norm = 0.0;  // ||Y - M(X*)||_F
    double c_used = 0.0;      // c1 for random masks, empirical c2 otherwise
    double rhs = 0.0;
    bool condition_met = false; // n_samples > n_required
    bool vacuous = false;       // bound not claimed for this trial
    bool passed = false;        // lhs <= rhs
};

struct TheoryReport {
    std::size_t r_observed = 0;
    double mu_u = 0.0;
    double mu_v = 0.0;
    double mu0 = 0.0;
    double c1 = 0.0;
    double n_required = 0.0;
    std::size_t n_actual = 0;
    double lemma1_min_ratio = 0.0;
    double lemma1_pass_fraction = 0.0;
    double theorem_bound_pass_fraction = 0.0; // over non-vacuous trials; 1 when none
    double c2_estimate = 0.0;                 // min sampled ratio
    std::size_t trials = 0;
    std::size_t vacuous_trials = 0;
    std::size_t lemma1_skipped = 0;
    std::uint64_t seed = 0;
    std::vector<BoundTrial> bound_trials;
};

/// Recovery-error bound harness.  Approximates the closest generator output
/// to the true k-space stack X* = [x*, x*] by a spectrum latent search with
/// the parameters fixed (restarts random draws, then sweeps rounds of
/// per-coordinate refinement), derives the subspace pair from the lifted
/// difference against the trained spectrum, and checks lhs <= rhs per trial.
/// Random mask kinds redraw a fresh mask per trial and use c1; deterministic
/// kinds keep the scene mask and substitute the empirical c2.  Trials where
/// the bound is not claimed (c <= 0, or the sampling condition fails for a
/// random mask) are reported as vacuous, never as failures.
TheoryReport theorem_bound_verify(const TrainedGenerator& t, const AcquisitionScene& scene,
                                  std::size_t trials, std::size_t d = 4,
                                  std::uint64_t seed = 1, std::size_t restarts = 64,
                                  std::size_t sweeps = 2);

/// gamma = max(c/a - 1, 0); throws unless a > 0, and verifies b <= gamma*a
/// (which any a > 0, b >= 0 with a + b <= c satisfies).
double lemma2_check(double a, double b, double c);

/// Writes <dir>/report.txt (key=value) and <dir>/trials.csv (one row per
/// bound trial).  The directory must exist.
void write_theory_report(const TheoryReport& rep, const std::string& dir);

} // namespace kunn
