#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ratesculpt/dsp.hpp"
#include "ratesculpt/json_io.hpp"
#include "ratesculpt/rng.hpp"
#include "ratesculpt/stimgen.hpp"
#include "ratesculpt/trial_log.hpp"

namespace ratesculpt::revcor {

enum class Dimension { Stretch, Pitch };
enum class Normalization { Euclidean, None };
// Whether the class means are differenced before or after each is normalized.
enum class NormalizeOrder { DifferenceFirst, PerClassFirst };

Dimension parse_dimension(std::string_view name);
std::string_view to_string(Dimension d);

// Stimulus coordinates for one dimension: log2(stretch) or pitch cents.
std::vector<double> features(const TransformSpec& spec, Dimension dimension);

struct Kernel {
    Dimension dimension = Dimension::Stretch;
    std::vector<double> weights;                        // class A minus class B
    std::array<std::string, 2> response_classes;
    std::array<std::size_t, 2> n_trials_per_class{};
    std::array<std::vector<double>, 2> class_means;     // raw per-class averages
    std::array<std::vector<double>, 2> class_kernels;   // per-class averages, normalized
    Normalization normalization = Normalization::Euclidean;
    bool degenerate = false;                            // all-zero kernel left unnormalized
};

struct KernelOptions {
    std::string class_a;  // empty: first option of the first trial
    std::string class_b;  // empty: second option of the first trial
    Normalization normalization = Normalization::Euclidean;
    NormalizeOrder order = NormalizeOrder::DifferenceFirst;
};

// Stimulus id -> transform, built from one or more manifests.
class SpecIndex {
public:
    void add(const BatchManifest& manifest);
    void add(std::string stimulus_id, TransformSpec spec);
    const TransformSpec& at(const std::string& stimulus_id) const;
    std::size_t size() const noexcept { return specs_.size(); }

private:
    std::map<std::string, TransformSpec> specs_;
};

// Classification image from feature vectors labelled with class 0 (A) or 1 (B).
Kernel kernel_from_features(std::span<const std::vector<double>> features, std::span<const int> classes,
                            Dimension dimension, const std::array<std::string, 2>& labels,
                            Normalization normalization = Normalization::Euclidean,
                            NormalizeOrder order = NormalizeOrder::DifferenceFirst);

// Trials of one participant and condition. Throws DegenerateClassError when a
// class has no trials.
Kernel compute_kernel(std::span<const TrialRecord> trials, const SpecIndex& specs, Dimension dimension,
                      const KernelOptions& options = {});

struct KernelStats {
    std::vector<double> t;
    std::vector<double> p;
    std::vector<double> adjusted_p;  // equals p when Holm is off
    std::vector<bool> significant;
    double df = 0.0;
    bool holm = false;
    double alpha = 0.05;
};

struct GroupTestOptions {
    bool holm = false;
    double alpha = 0.05;
};

// Paired t across participants at every window between the two alternatives'
// kernels. Throws InsufficientData for fewer than two participants.
KernelStats group_ttest(std::span<const std::vector<double>> kernels_a,
                        std::span<const std::vector<double>> kernels_b, const GroupTestOptions& options = {});

double cosine_similarity(std::span<const double> a, std::span<const double> b);
std::vector<double> normalize_euclidean(std::vector<double> v);

// Distal-contrastive / proximal-congruent shape over n windows, for simulation.
std::vector<double> scissor_template(std::size_t n_windows);

// Noiseless linear listener: answers class A iff <template, stimulus> > 0.
struct SyntheticObserver {
    std::vector<double> template_weights;
    double internal_noise_sd = 0.0;

    int respond(std::span<const double> stimulus_features, Rng& rng) const;
};

struct SimulatedSession {
    std::vector<std::vector<double>> features;
    std::vector<int> classes;
};

SimulatedSession simulate_session(const SyntheticObserver& observer, std::size_t n_windows, std::size_t n_trials,
                                  const SamplingParams& params, std::uint64_t seed,
                                  Dimension dimension = Dimension::Stretch);

Json kernel_to_json(const Kernel& k);
Kernel kernel_from_json(const Json& j);

}  // namespace ratesculpt::revcor
