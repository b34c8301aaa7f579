#include "ratesculpt/revcor.hpp"

#include <cmath>
#include <numbers>

#include "ratesculpt/error.hpp"
#include "ratesculpt/rng.hpp"
#include "ratesculpt/stats.hpp"

namespace ratesculpt::revcor {

Dimension parse_dimension(std::string_view name) {
    if (name == "stretch") return Dimension::Stretch;
    if (name == "pitch") return Dimension::Pitch;
    fail(ErrorCode::InvalidInput, "dimension must be 'stretch' or 'pitch'");
}

std::string_view to_string(Dimension d) { return d == Dimension::Stretch ? "stretch" : "pitch"; }

std::vector<double> features(const TransformSpec& spec, Dimension dimension) {
    if (dimension == Dimension::Pitch) return spec.pitch_cents;
    std::vector<double> out(spec.stretch.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log2(spec.stretch[i]);
    return out;
}

void SpecIndex::add(const BatchManifest& manifest) {
    for (const auto& e : manifest.stimuli) add(e.stimulus_id, e.spec);
}

void SpecIndex::add(std::string stimulus_id, TransformSpec spec) { specs_[std::move(stimulus_id)] = std::move(spec); }

const TransformSpec& SpecIndex::at(const std::string& stimulus_id) const {
    const auto it = specs_.find(stimulus_id);
    if (it == specs_.end()) fail(ErrorCode::NotFound, "stimulus '" + stimulus_id + "' is not in any manifest");
    return it->second;
}

std::vector<double> normalize_euclidean(std::vector<double> v) {
    double ss = 0.0;
    for (double x : v) ss += x * x;
    if (ss > 0.0) {
        const double norm = std::sqrt(ss);
        for (double& x : v) x /= norm;
    }
    return v;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "vectors differ in length");
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    return aa > 0 && bb > 0 ? ab / std::sqrt(aa * bb) : 0.0;
}

Kernel kernel_from_features(std::span<const std::vector<double>> feats, std::span<const int> classes,
                            Dimension dimension, const std::array<std::string, 2>& labels,
                            Normalization normalization, NormalizeOrder order) {
    require(feats.size() == classes.size(), "one class label per trial required");
    require(!feats.empty(), "no trials");
    const std::size_t n = feats.front().size();

    Kernel k;
    k.dimension = dimension;
    k.response_classes = labels;
    k.normalization = normalization;
    k.class_means = {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    for (std::size_t t = 0; t < feats.size(); ++t) {
        require(feats[t].size() == n, "trials have different window counts");
        const int c = classes[t];
        require(c == 0 || c == 1, "class labels must be 0 or 1");
        ++k.n_trials_per_class[c];
        for (std::size_t i = 0; i < n; ++i) k.class_means[c][i] += feats[t][i];
    }
    for (int c = 0; c < 2; ++c) {
        if (k.n_trials_per_class[c] == 0) throw DegenerateClassError(labels[c]);
        for (double& v : k.class_means[c]) v /= static_cast<double>(k.n_trials_per_class[c]);
    }

    const bool euclid = normalization == Normalization::Euclidean;
    for (int c = 0; c < 2; ++c)
        k.class_kernels[c] = euclid ? normalize_euclidean(k.class_means[c]) : k.class_means[c];

    const auto& a = order == NormalizeOrder::PerClassFirst ? k.class_kernels[0] : k.class_means[0];
    const auto& b = order == NormalizeOrder::PerClassFirst ? k.class_kernels[1] : k.class_means[1];
    k.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) k.weights[i] = a[i] - b[i];
    k.degenerate = std::all_of(k.weights.begin(), k.weights.end(), [](double w) { return w == 0.0; });
    if (euclid && !k.degenerate) k.weights = normalize_euclidean(std::move(k.weights));
    return k;
}

Kernel compute_kernel(std::span<const TrialRecord> trials, const SpecIndex& specs, Dimension dimension,
                      const KernelOptions& options) {
    require(!trials.empty(), "no trials");
    std::array<std::string, 2> labels{options.class_a, options.class_b};
    const auto& first = trials.front().option_groups.at(0);
    if (labels[0].empty()) labels[0] = first.at(0);
    if (labels[1].empty()) labels[1] = first.at(1);
    require(labels[0] != labels[1], "response classes must differ");

    std::vector<std::vector<double>> feats;
    std::vector<int> classes;
    feats.reserve(trials.size());
    for (const auto& t : trials) {
        const auto& chosen = t.chosen(0);
        int c;
        if (chosen == labels[0])
            c = 0;
        else if (chosen == labels[1])
            c = 1;
        else
            fail(ErrorCode::InvalidInput, "response '" + chosen + "' is neither '" + labels[0] + "' nor '" + labels[1] + "'");
        feats.push_back(features(specs.at(t.stimulus_id), dimension));
        classes.push_back(c);
    }
    return kernel_from_features(feats, classes, dimension, labels, options.normalization, options.order);
}

KernelStats group_ttest(std::span<const std::vector<double>> kernels_a,
                        std::span<const std::vector<double>> kernels_b, const GroupTestOptions& options) {
    require(kernels_a.size() == kernels_b.size(), "each participant needs a kernel for both alternatives");
    if (kernels_a.size() < 2) fail(ErrorCode::InsufficientData, "group test needs at least two participants");
    const std::size_t n = kernels_a.front().size();
    for (std::size_t p = 0; p < kernels_a.size(); ++p)
        require(kernels_a[p].size() == n && kernels_b[p].size() == n, "kernels have different window counts");

    KernelStats out;
    out.holm = options.holm;
    out.alpha = options.alpha;
    out.df = static_cast<double>(kernels_a.size() - 1);
    std::vector<double> a(kernels_a.size()), b(kernels_a.size());
    for (std::size_t w = 0; w < n; ++w) {
        for (std::size_t p = 0; p < kernels_a.size(); ++p) {
            a[p] = kernels_a[p][w];
            b[p] = kernels_b[p][w];
        }
        double t = 0.0, pval = 1.0;
        try {
            const auto r = stats::paired_t(a, b);
            t = r.statistic;
            pval = r.p;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoVariation) throw;
            // Identical kernels (or a constant shift with no spread) carry no evidence.
            bool identical = true;
            for (std::size_t p = 0; p < a.size(); ++p) identical = identical && a[p] == b[p];
            if (!identical) {
                t = std::copysign(INFINITY, a[0] - b[0]);
                pval = 0.0;
            }
        }
        out.t.push_back(t);
        out.p.push_back(pval);
    }
    if (options.holm) {
        const auto h = stats::holm_correct(out.p, options.alpha);
        out.adjusted_p = h.adjusted;
        out.significant = h.reject;
    } else {
        out.adjusted_p = out.p;
        for (double p : out.p) out.significant.push_back(p < options.alpha);
    }
    return out;
}

std::vector<double> scissor_template(std::size_t n_windows) {
    std::vector<double> out(n_windows, 0.0);
    for (std::size_t i = 0; i < n_windows; ++i) {
        const double u = (i + 0.5) / static_cast<double>(n_windows);
        if (u < 0.42)
            out[i] = -std::sin(std::numbers::pi * u / 0.42);
        else if (u >= 0.52 && u < 0.84)
            out[i] = std::sin(std::numbers::pi * (u - 0.52) / 0.32);
    }
    return out;
}

int SyntheticObserver::respond(std::span<const double> stimulus_features, Rng& rng) const {
    require(stimulus_features.size() == template_weights.size(), "stimulus does not match the observer template");
    double evidence = 0.0;
    for (std::size_t i = 0; i < stimulus_features.size(); ++i) evidence += template_weights[i] * stimulus_features[i];
    if (internal_noise_sd > 0) evidence += internal_noise_sd * rng.normal();
    return evidence > 0.0 ? 0 : 1;
}

SimulatedSession simulate_session(const SyntheticObserver& observer, std::size_t n_windows, std::size_t n_trials,
                                  const SamplingParams& params, std::uint64_t seed, Dimension dimension) {
    SimulatedSession s;
    Rng noise(derive_seed(seed, ~std::uint64_t{0}));
    for (std::size_t t = 0; t < n_trials; ++t) {
        auto f = features(sample_transform(n_windows, params, derive_seed(seed, t)), dimension);
        s.classes.push_back(observer.respond(f, noise));
        s.features.push_back(std::move(f));
    }
    return s;
}

Json kernel_to_json(const Kernel& k) {
    Json j;
    j["dimension"] = std::string(to_string(k.dimension));
    j["response_classes"] = k.response_classes;
    j["n_trials_per_class"] = k.n_trials_per_class;
    j["normalization"] = k.normalization == Normalization::Euclidean ? "euclidean" : "none";
    j["degenerate"] = k.degenerate;
    j["weights"] = k.weights;
    j["class_means"] = {k.class_means[0], k.class_means[1]};
    j["class_kernels"] = {k.class_kernels[0], k.class_kernels[1]};
    return j;
}

Kernel kernel_from_json(const Json& j) {
    try {
        Kernel k;
        k.dimension = parse_dimension(j.at("dimension").get<std::string>());
        k.response_classes = j.at("response_classes").get<std::array<std::string, 2>>();
        k.n_trials_per_class = j.at("n_trials_per_class").get<std::array<std::size_t, 2>>();
        k.normalization = j.at("normalization").get<std::string>() == "none" ? Normalization::None
                                                                              : Normalization::Euclidean;
        k.degenerate = j.at("degenerate").get<bool>();
        k.weights = j.at("weights").get<std::vector<double>>();
        const auto means = j.at("class_means").get<std::vector<std::vector<double>>>();
        const auto kernels = j.at("class_kernels").get<std::vector<std::vector<double>>>();
        require(means.size() == 2 && kernels.size() == 2, "kernel needs two classes");
        k.class_means = {means[0], means[1]};
        k.class_kernels = {kernels[0], kernels[1]};
        return k;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidInput, std::string("malformed kernel: ") + e.what());
    }
}

}  // namespace ratesculpt::revcor
