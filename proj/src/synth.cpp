#include "seed/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "seed/errors.hpp"
#include "seed/rng.hpp"

namespace seed {

namespace {

// Generator shape constants. The domain geometry is expressed through each
// row's cosine c_i to its domain centre: a "core" band whose level tracks
// kappa, plus a moderate-cosine "ring" whose share grows as kappa drops. Ring
// members sit close enough to a dense core to clear a global similarity
// threshold but below an adaptive one, which is exactly the regime where
// local scaling changes the graph.
constexpr double kRingLo = 0.56;
constexpr double kRingHi = 0.67;
constexpr double kCoreQualityFraction = 0.12;  // planted share living inside the core
constexpr double kDomainMagnitude = 2.5;     // noise-block scale of every row
constexpr double kChannelNoisePower = 0.05;  // heteroscedastic channel noise vs direction
constexpr double kScaleSigmaTrain = 1.25;    // log-sd of train-side channel scales
constexpr double kSignalFloorBias = 0.12;    // fixed per-channel activation floor
constexpr double kSignalFloorNoise = 0.03;   // per-row signal-channel noise
constexpr double kQualityLo = 0.25;          // planted signal magnitude range
constexpr double kQualityHi = 0.5;
constexpr double kTargetSignal = 6.4;        // target-row signal magnitude
constexpr double kTargetSignalNoise = 0.1;
constexpr double kTargetNoise = 0.15;        // isotropic target noise magnitude
constexpr double kTargetTilt = 1.15;         // target noise along the first domain centre

double ring_fraction(double kappa) { return std::min(0.75, 1.0 / (1.0 + kappa / 12.0)); }

std::vector<double> gaussian_vec(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return v;
}

void normalize_inplace(std::vector<double>& v) {
    double sq = 0.0;
    for (const double x : v) sq += x * x;
    if (sq == 0.0) return;
    const double inv = 1.0 / std::sqrt(sq);
    for (double& x : v) x *= inv;
}

/// Removes the component along each unit vector in basis, then normalizes.
void orthonormalize_against(std::vector<double>& v,
                            const std::vector<std::vector<double>>& basis) {
    for (const auto& b : basis) {
        double proj = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) proj += v[i] * b[i];
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * b[i];
    }
    normalize_inplace(v);
}

/// Log-normal channel scales with unit mean.
std::vector<double> channel_scales(Rng& rng, std::size_t n, double log_sd) {
    std::vector<double> s(n);
    const double mean_correction = -0.5 * log_sd * log_sd;
    for (auto& x : s) x = std::exp(log_sd * rng.normal() + mean_correction);
    return s;
}

}  // namespace

void SynthSpec::validate() const {
    if (domains.empty()) throw ValidationError("synth: at least one domain required");
    for (const auto& d : domains) {
        if (d.count < 1) throw ValidationError("synth: domain count must be >= 1");
        if (!(d.kappa > 0.0)) throw ValidationError("synth: kappa must be > 0");
        if (d.quality_fraction < 0.0 || d.quality_fraction > 1.0) {
            throw ValidationError("synth: quality_fraction must lie in [0, 1]");
        }
    }
    if (signal_channels < 1) throw ValidationError("synth: signal_channels must be >= 1");
    if (noise_channels < 1) throw ValidationError("synth: noise_channels must be >= 1");
    if (checkpoints.empty()) throw ValidationError("synth: at least one checkpoint required");
    for (const auto& ck : checkpoints) {
        if (!(ck.learning_rate > 0.0)) throw ValidationError("synth: learning_rate must be > 0");
    }
    if (targets.empty()) throw ValidationError("synth: at least one target set required");
    std::vector<std::string> names;
    for (const auto& t : targets) {
        if (t.count < 1) throw ValidationError("synth: target count must be >= 1");
        if (t.name.empty()) throw ValidationError("synth: target name must be non-empty");
        names.push_back(t.name);
    }
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
        throw ValidationError("synth: duplicate target name");
    }
}

std::pair<CheckpointBundle, GroundTruth> generate(const SynthSpec& spec) {
    spec.validate();

    const std::size_t s_ch = static_cast<std::size_t>(spec.signal_channels);
    const std::size_t q_ch = static_cast<std::size_t>(spec.noise_channels);
    const std::size_t channels = s_ch + q_ch;
    const std::size_t t_count = spec.checkpoints.size();

    std::size_t n = 0;
    for (const auto& d : spec.domains) n += static_cast<std::size_t>(d.count);

    Rng root(spec.seed);

    // Shared task direction on the signal channels; components bounded away
    // from zero so every signal channel is genuinely salient on the targets.
    Rng rng_w = root.fork(1);
    std::vector<double> w(s_ch);
    for (auto& x : w) {
        const double sign = rng_w.uniform() < 0.5 ? -1.0 : 1.0;
        x = sign * rng_w.uniform(0.8, 1.5);
    }
    normalize_inplace(w);

    // fixed sign pattern for the train-side activation floor; constant across
    // rows, so it shifts weights uniformly without adding variance
    std::vector<double> floor_sign(s_ch);
    for (auto& x : floor_sign) x = rng_w.uniform() < 0.5 ? -1.0 : 1.0;

    // Long-tail per-channel magnitudes on the training side.
    Rng rng_scales = root.fork(2);
    const std::vector<double> scale_train = channel_scales(rng_scales, q_ch, kScaleSigmaTrain);

    double scale_train_sq = 0.0;
    for (const double s : scale_train) scale_train_sq += s * s;
    // channel-noise coefficient: fixed fraction of the direction power
    const double beta =
        kDomainMagnitude * std::sqrt(kChannelNoisePower / std::max(scale_train_sq, 1e-300));

    // Domain centres: plain gaussian directions, orthonormalized while rank
    // lasts. Deliberately independent of the channel scales so the direction
    // power is spread across channels rather than a salient few.
    Rng rng_centers = root.fork(3);
    std::vector<std::vector<double>> centers;
    for (std::size_t d = 0; d < spec.domains.size(); ++d) {
        auto u = gaussian_vec(rng_centers, q_ch);
        if (centers.size() < q_ch) orthonormalize_against(u, centers);
        normalize_inplace(u);
        centers.push_back(std::move(u));
    }

    CheckpointBundle bundle;
    bundle.target_names.reserve(spec.targets.size());
    for (const auto& t : spec.targets) bundle.target_names.push_back(t.name);
    std::sort(bundle.target_names.begin(), bundle.target_names.end());

    bundle.checkpoints.resize(t_count);
    for (std::size_t t = 0; t < t_count; ++t) {
        auto& ck = bundle.checkpoints[t];
        ck.step_id = spec.checkpoints[t].step_id;
        ck.learning_rate = spec.checkpoints[t].learning_rate;
        ck.train = DenseMatrix(n, channels);
        for (const auto& name : bundle.target_names) {
            for (const auto& ts : spec.targets) {
                if (ts.name == name) {
                    ck.targets.push_back(DenseMatrix(static_cast<std::size_t>(ts.count), channels));
                }
            }
        }
    }

    GroundTruth truth;
    truth.domain_label.resize(n);
    truth.is_high_quality.assign(n, 0);
    truth.true_quality_score.assign(n, 0.0);
    truth.domain_count = static_cast<std::int32_t>(spec.domains.size());

    // Training rows, one derived stream per domain.
    std::size_t row_offset = 0;
    for (std::size_t d = 0; d < spec.domains.size(); ++d) {
        const auto& dom = spec.domains[d];
        const std::size_t rows = static_cast<std::size_t>(dom.count);
        Rng rng = root.fork(100 + d);

        const std::size_t planted =
            static_cast<std::size_t>(std::llround(dom.quality_fraction * static_cast<double>(rows)));
        const double f_ring = ring_fraction(dom.kappa);
        const double core_lo = dom.kappa / (dom.kappa + 0.9);
        const double core_hi = dom.kappa / (dom.kappa + 0.6);

        std::vector<double> center_cos(rows);
        std::vector<double> quality(rows, 0.0);
        const std::size_t core_planted =
            core_lo > kRingHi ? static_cast<std::size_t>(std::llround(
                                    kCoreQualityFraction * static_cast<double>(planted)))
                              : 0;
        for (std::size_t r = 0; r < rows; ++r) {
            // planted rows sit mostly on the moderate-similarity ring: quality
            // is a property of individual samples, not of duplicate clusters.
            // In domains with a genuine core, a small fixed share of top-value
            // rows lives inside it.
            if (r < planted) {
                if (r < core_planted) {
                    center_cos[r] = rng.uniform(core_lo, core_hi);
                    quality[r] = rng.uniform(1.1 * kQualityHi, 1.2 * kQualityHi);
                } else {
                    center_cos[r] = rng.uniform(kRingLo, kRingHi);
                    quality[r] = rng.uniform(kQualityLo, kQualityHi);
                }
            } else {
                const bool ring = rng.uniform() < f_ring;
                center_cos[r] =
                    ring ? rng.uniform(kRingLo, kRingHi) : rng.uniform(core_lo, core_hi);
            }

            const std::size_t i = row_offset + r;
            truth.domain_label[i] = static_cast<std::int32_t>(d);
            truth.is_high_quality[i] = r < planted ? 1 : 0;
            truth.true_quality_score[i] = quality[r];
        }

        for (std::size_t t = 0; t < t_count; ++t) {
            DenseMatrix& train = bundle.checkpoints[t].train;
            for (std::size_t r = 0; r < rows; ++r) {
                float* row = train.row(row_offset + r);

                // signal block: planted magnitude along w, a fixed
                // activation floor, and a small per-row noise
                for (std::size_t c = 0; c < s_ch; ++c) {
                    const double v = quality[r] * w[c] + kSignalFloorBias * floor_sign[c] +
                                     kSignalFloorNoise * rng.normal();
                    row[c] = static_cast<float>(v);
                }

                // noise block: domain direction at the drawn cosine, fresh
                // tangent per checkpoint, heteroscedastic channel noise. The
                // block shrinks on planted rows so row norms stay equal and
                // cosine geometry is not confounded with quality.
                const double row_power = kDomainMagnitude * kDomainMagnitude *
                                         (1.0 + kChannelNoisePower);
                const double equalizer =
                    std::sqrt(std::max(0.3, 1.0 - quality[r] * quality[r] / row_power));
                auto tangent = gaussian_vec(rng, q_ch);
                orthonormalize_against(tangent, {centers[d]});
                const double ct = center_cos[r];
                const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
                for (std::size_t c = 0; c < q_ch; ++c) {
                    const double direction = ct * centers[d][c] + st * tangent[c];
                    const double v = equalizer * (kDomainMagnitude * direction +
                                                  beta * scale_train[c] * rng.normal());
                    row[s_ch + c] = static_cast<float>(v);
                }
            }
        }
        row_offset += rows;
    }

    // Target rows: shared task direction on the signal channels; noise
    // channels carry isotropic noise plus a component along the first
    // domain's centre, modelling a pool where that domain is overrepresented.
    for (std::size_t b = 0; b < bundle.target_names.size(); ++b) {
        Rng rng = root.fork(200 + b);
        for (std::size_t t = 0; t < t_count; ++t) {
            DenseMatrix& tm = bundle.checkpoints[t].targets[b];
            for (std::size_t r = 0; r < tm.rows; ++r) {
                float* row = tm.row(r);
                for (std::size_t c = 0; c < s_ch; ++c) {
                    row[c] = static_cast<float>(kTargetSignal * w[c] +
                                                kTargetSignalNoise * rng.normal());
                }
                const double tilt = kTargetTilt * rng.uniform(0.5, 1.5);
                for (std::size_t c = 0; c < q_ch; ++c) {
                    row[s_ch + c] =
                        static_cast<float>(kTargetNoise * rng.normal() + tilt * centers[0][c]);
                }
            }
        }
    }

    finalize_bundle(bundle);
    return {std::move(bundle), std::move(truth)};
}

SynthSpec standard_spec(std::uint64_t seed, double quality_fraction) {
    SynthSpec spec;
    spec.domains = {
        {150, 50.0, quality_fraction},
        {150, 2.0, quality_fraction},
    };
    spec.signal_channels = 8;
    spec.noise_channels = 504;
    spec.checkpoints = {{0, 0.5}, {1, 0.5}};
    spec.targets = {{"target", 32}};
    spec.seed = seed;
    return spec;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t r = i; r <= j; ++r) ranks[order[r]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ValidationError("spearman: length mismatch");
    }
    if (a.size() < 2) return 0.0;
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = ra[i] - ma;
        const double db = rb[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0 || vb == 0.0) return 0.0;
    return cov / std::sqrt(va * vb);
}

SelectionMetrics eval_selection(std::span<const std::int32_t> selected, const GroundTruth& truth,
                                std::span<const double> weights, const Matrix64* embeddings) {
    if (selected.empty()) {
        throw ValidationError("eval_selection: empty selection");
    }
    const std::size_t n = truth.domain_label.size();
    if (weights.size() != n) {
        throw ValidationError("eval_selection: weights length mismatch");
    }
    for (const std::int32_t id : selected) {
        if (id < 0 || static_cast<std::size_t>(id) >= n) {
            throw ValidationError("eval_selection: selected id out of range");
        }
    }

    SelectionMetrics m;

    std::size_t planted_total = 0, planted_hit = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (truth.is_high_quality[i]) ++planted_total;
    }
    for (const std::int32_t id : selected) {
        if (truth.is_high_quality[id]) ++planted_hit;
    }
    m.quality_recall = planted_total == 0
                           ? 1.0
                           : static_cast<double>(planted_hit) / static_cast<double>(planted_total);

    const std::size_t domains = static_cast<std::size_t>(truth.domain_count);
    if (domains <= 1) {
        m.domain_entropy = 1.0;
    } else {
        std::vector<double> counts(domains, 0.0);
        for (const std::int32_t id : selected) counts[truth.domain_label[id]] += 1.0;
        double h = 0.0;
        const double total = static_cast<double>(selected.size());
        for (const double c : counts) {
            if (c > 0.0) {
                const double p = c / total;
                h -= p * std::log(p);
            }
        }
        m.domain_entropy = h / std::log(static_cast<double>(domains));
    }

    m.rank_corr = spearman(weights, truth.true_quality_score);

    if (embeddings != nullptr && selected.size() >= 2) {
        if (embeddings->rows != n) {
            throw ValidationError("eval_selection: embeddings row count mismatch");
        }
        std::vector<double> norms(selected.size(), 0.0);
        for (std::size_t a = 0; a < selected.size(); ++a) {
            const double* row = embeddings->row(selected[a]);
            double sq = 0.0;
            for (std::size_t c = 0; c < embeddings->cols; ++c) sq += row[c] * row[c];
            norms[a] = std::sqrt(sq);
        }
        double acc = 0.0;
        std::size_t pairs = 0;
        for (std::size_t a = 0; a < selected.size(); ++a) {
            for (std::size_t b = a + 1; b < selected.size(); ++b) {
                if (norms[a] == 0.0 || norms[b] == 0.0) continue;
                const double* ra = embeddings->row(selected[a]);
                const double* rb = embeddings->row(selected[b]);
                double dotp = 0.0;
                for (std::size_t c = 0; c < embeddings->cols; ++c) dotp += ra[c] * rb[c];
                acc += dotp / (norms[a] * norms[b]);
                ++pairs;
            }
        }
        m.redundancy = pairs == 0 ? 0.0 : acc / static_cast<double>(pairs);
    }
    return m;
}

DomainDegreeStats degree_balance(const ConflictGraph& graph,
                                 std::span<const std::int32_t> domain_labels) {
    if (domain_labels.size() != graph.node_count) {
        throw ValidationError("degree_balance: labels length mismatch");
    }
    std::int32_t domains = 0;
    for (const std::int32_t d : domain_labels) {
        if (d < 0) throw ValidationError("degree_balance: negative domain label");
        domains = std::max(domains, d + 1);
    }

    DomainDegreeStats stats;
    stats.mean_degree.assign(domains, 0.0);
    stats.max_degree.assign(domains, 0);
    stats.node_count.assign(domains, 0);

    for (std::size_t i = 0; i < graph.node_count; ++i) {
        const std::int32_t d = domain_labels[i];
        const std::size_t deg = graph.adjacency[i].size();
        stats.mean_degree[d] += static_cast<double>(deg);
        stats.max_degree[d] = std::max(stats.max_degree[d], deg);
        stats.node_count[d] += 1;
    }

    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (std::int32_t d = 0; d < domains; ++d) {
        if (stats.node_count[d] == 0) continue;  // empty domains have no mean
        stats.mean_degree[d] /= static_cast<double>(stats.node_count[d]);
        if (!any) {
            lo = hi = stats.mean_degree[d];
            any = true;
        } else {
            lo = std::min(lo, stats.mean_degree[d]);
            hi = std::max(hi, stats.mean_degree[d]);
        }
    }
    // +1 smoothing keeps the ratio defined for edgeless domains
    stats.ratio = any ? (hi + 1.0) / (lo + 1.0) : 1.0;
    return stats;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

SynthSpec parse_synth_spec(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("synth spec: ") + e.what());
    }
    SynthSpec spec;
    try {
        spec.seed = doc.value("seed", std::uint64_t{0});
        spec.signal_channels = doc.at("signal_channels").get<std::int64_t>();
        spec.noise_channels = doc.at("noise_channels").get<std::int64_t>();
        spec.domains.clear();
        for (const auto& d : doc.at("domains")) {
            spec.domains.push_back({d.at("count").get<std::int64_t>(),
                                    d.at("kappa").get<double>(),
                                    d.value("quality_fraction", 0.0)});
        }
        if (doc.contains("checkpoints")) {
            spec.checkpoints.clear();
            for (const auto& c : doc.at("checkpoints")) {
                spec.checkpoints.push_back({c.at("step_id").get<std::int64_t>(),
                                            c.at("learning_rate").get<double>()});
            }
        }
        if (doc.contains("targets")) {
            spec.targets.clear();
            for (const auto& t : doc.at("targets")) {
                spec.targets.push_back(
                    {t.at("name").get<std::string>(), t.at("count").get<std::int64_t>()});
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("synth spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

std::string synth_spec_json(const SynthSpec& spec) {
    nlohmann::json doc;
    doc["seed"] = spec.seed;
    doc["signal_channels"] = spec.signal_channels;
    doc["noise_channels"] = spec.noise_channels;
    doc["domains"] = nlohmann::json::array();
    for (const auto& d : spec.domains) {
        doc["domains"].push_back({{"count", d.count},
                                  {"kappa", d.kappa},
                                  {"quality_fraction", d.quality_fraction}});
    }
    doc["checkpoints"] = nlohmann::json::array();
    for (const auto& c : spec.checkpoints) {
        doc["checkpoints"].push_back({{"step_id", c.step_id}, {"learning_rate", c.learning_rate}});
    }
    doc["targets"] = nlohmann::json::array();
    for (const auto& t : spec.targets) {
        doc["targets"].push_back({{"name", t.name}, {"count", t.count}});
    }
    return doc.dump(2);
}

std::string ground_truth_json(const GroundTruth& truth) {
    nlohmann::json doc;
    doc["domain_count"] = truth.domain_count;
    doc["domain_label"] = truth.domain_label;
    doc["is_high_quality"] = truth.is_high_quality;
    doc["true_quality_score"] = truth.true_quality_score;
    return doc.dump();
}

GroundTruth parse_ground_truth(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("ground truth: ") + e.what());
    }
    GroundTruth truth;
    try {
        truth.domain_count = doc.at("domain_count").get<std::int32_t>();
        truth.domain_label = doc.at("domain_label").get<std::vector<std::int32_t>>();
        truth.is_high_quality = doc.at("is_high_quality").get<std::vector<std::uint8_t>>();
        truth.true_quality_score = doc.at("true_quality_score").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("ground truth: ") + e.what());
    }
    return truth;
}

}  // namespace seed
