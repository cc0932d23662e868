#include "disent/harness.hpp"

#include "disent/error.hpp"
#include "disent/io_util.hpp"
#include "disent/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <map>

#ifndef DISENT_VERSION
#define DISENT_VERSION "0.0.0"
#endif

namespace disent {

using nlohmann::json;

std::string method_name(LossKind kind) {
    return kind == LossKind::None ? "baseline" : std::string(to_string(kind));
}

namespace {

std::uint64_t as_seed(std::int64_t v, const std::string& key) {
    require(v >= 0, ErrorKind::Validation, key + " must be >= 0");
    return static_cast<std::uint64_t>(v);
}

std::size_t as_count(std::int64_t v, const std::string& key) {
    require(v >= 0, ErrorKind::Validation, key + " must be >= 0");
    return static_cast<std::size_t>(v);
}

Normalization parse_norm(const std::string& name, const std::string& key) {
    auto n = parse_normalization(name);
    require(n.has_value(), ErrorKind::Validation,
            key + ": unknown normalization '" + name + "' (max, arithmetic, geometric, min)");
    return *n;
}

LossKind parse_method(const std::string& name, const std::string& key) {
    auto k = parse_loss_kind(name);
    require(k.has_value(), ErrorKind::Validation,
            key + ": unknown method '" + name + "' (baseline, single, multi, multi2, decov, xcov)");
    return *k;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_config(const Config& c) {
    ExperimentConfig e;
    e.data.source = c.get_string("data.source");
    e.data.blobs.n_per_class = as_count(c.get_int("data.blobs.n_per_class"), "data.blobs.n_per_class");
    e.data.blobs.n_classes = as_count(c.get_int("data.blobs.n_classes"), "data.blobs.n_classes");
    e.data.blobs.dim = as_count(c.get_int("data.blobs.dim"), "data.blobs.dim");
    e.data.blobs.center_scale = c.get_double("data.blobs.center_scale");
    e.data.blobs.noise_sigma = c.get_double("data.blobs.noise_sigma");
    e.data.blobs.seed = as_seed(c.get_int("data.blobs.seed"), "data.blobs.seed");
    e.data.blobs.min_separation_sigmas = c.get_double("data.blobs.min_separation_sigmas");
    e.data.idx_images = c.get_string("data.idx.images");
    e.data.idx_labels = c.get_string("data.idx.labels");
    e.data.csv_path = c.get_string("data.csv.path");
    e.data.max_samples = as_count(c.get_int("data.max_samples"), "data.max_samples");
    e.data.group_threshold = static_cast<int>(c.get_int("data.group_threshold"));
    const auto fr = c.get_doubles("data.split.fractions");
    require(fr.size() == 3, ErrorKind::Validation, "data.split.fractions needs three values");
    e.data.fractions = {fr[0], fr[1], fr[2]};
    e.data.split_seed = as_seed(c.get_int("data.split.seed"), "data.split.seed");

    e.hidden_sizes.clear();
    for (auto h : c.get_ints("model.hidden_sizes")) e.hidden_sizes.push_back(as_count(h, "model.hidden_sizes"));
    auto act = parse_activation(c.get_string("model.hidden_activation"));
    require(act.has_value(), ErrorKind::Validation,
            "model.hidden_activation: unknown activation '" + c.get_string("model.hidden_activation") + "'");
    e.hidden_activation = *act;

    e.train.epochs = as_count(c.get_int("train.epochs"), "train.epochs");
    e.train.batch_size = as_count(c.get_int("train.batch_size"), "train.batch_size");
    e.train.learning_rate = c.get_double("train.learning_rate");
    e.train.shuffle = c.get_bool("train.shuffle");
    e.train.seed = as_seed(c.get_int("train.seed"), "train.seed");

    e.margin_override = c.get_optional_double("loss.margin");
    e.single_margin = c.get_double("loss.single.margin");
    e.multi_margin = c.get_double("loss.multi.margin");
    e.multi2_margin = c.get_double("loss.multi2.margin");
    e.loss_weight = c.get_double("loss.weight");
    e.target_layer = static_cast<int>(c.get_int("loss.target_layer"));
    e.train.loss = e.loss_for(parse_method(c.get_string("loss.kind"), "loss.kind"));

    for (const auto& m : c.get_strings("experiment.methods")) e.methods.push_back(parse_method(m, "experiment.methods"));
    e.seeds.clear();
    for (auto s : c.get_ints("experiment.seeds")) e.seeds.push_back(as_seed(s, "experiment.seeds"));
    e.layer = static_cast<int>(c.get_int("experiment.layer"));

    e.cluster.k = as_count(c.get_int("cluster.k"), "cluster.k");
    e.cluster.n_init = as_count(c.get_int("cluster.n_init"), "cluster.n_init");
    e.cluster.max_iter = as_count(c.get_int("cluster.max_iter"), "cluster.max_iter");
    e.cluster.tol = c.get_double("cluster.tol");
    e.cluster.seed = as_seed(c.get_int("cluster.seed"), "cluster.seed");
    e.ami_norm = parse_norm(c.get_string("metrics.ami_normalization"), "metrics.ami_normalization");
    e.nmi_norm = parse_norm(c.get_string("metrics.nmi_normalization"), "metrics.nmi_normalization");
    e.spread_fraction = c.get_double("metrics.spread_fraction");
    e.output_dir = c.get_string("output.dir");
    e.echo = c.to_json();
    e.validate();
    return e;
}

void ExperimentConfig::validate() const {
    require(data.source == "blobs" || data.source == "idx" || data.source == "csv", ErrorKind::Validation,
            "data.source must be blobs, idx or csv, got '" + data.source + "'");
    require(!hidden_sizes.empty(), ErrorKind::Validation, "model.hidden_sizes needs at least one layer");
    for (auto h : hidden_sizes) require(h >= 1, ErrorKind::Validation, "model.hidden_sizes entries must be >= 1");
    require(!seeds.empty(), ErrorKind::Validation, "experiment.seeds needs at least one seed");
    require(cluster.k >= 2, ErrorKind::Validation, "cluster.k must be >= 2");
    require(cluster.n_init >= 1, ErrorKind::Validation, "cluster.n_init must be >= 1");
    require(spread_fraction > 0.0 && spread_fraction <= 1.0, ErrorKind::Validation,
            "metrics.spread_fraction must lie in (0, 1]");
    try {
        train.validate();
        const std::size_t depth = hidden_sizes.size() + 1;
        for (LossKind k : methods) loss_for(k).validate(depth);
        loss_for(LossKind::Single).validate(depth);
    } catch (const Error& err) {
        fail(ErrorKind::Validation, err.what());
    }
    representation_layer(layer);
}

LossSpec ExperimentConfig::loss_for(LossKind kind) const {
    LossSpec s = LossSpec::with_defaults(kind);
    switch (kind) {
        case LossKind::Single: s.margin = single_margin; break;
        case LossKind::Multi: s.margin = multi_margin; break;
        case LossKind::Multi2: s.margin = multi2_margin; break;
        default: break;
    }
    if (margin_override && (kind == LossKind::Single || kind == LossKind::Multi || kind == LossKind::Multi2))
        s.margin = *margin_override;
    s.weight = loss_weight;
    s.target_layer = target_layer;
    return s;
}

std::vector<std::size_t> ExperimentConfig::layer_sizes(std::size_t input_dim) const {
    std::vector<std::size_t> sizes{input_dim};
    sizes.insert(sizes.end(), hidden_sizes.begin(), hidden_sizes.end());
    sizes.push_back(1);
    return sizes;
}

std::vector<Activation> ExperimentConfig::activations() const {
    std::vector<Activation> acts(hidden_sizes.size(), hidden_activation);
    acts.push_back(Activation::Sigmoid);
    return acts;
}

std::size_t ExperimentConfig::representation_layer(int requested) const {
    const int depth = static_cast<int>(hidden_sizes.size()) + 1;
    const int layer = requested == -1 ? depth - 2 : requested;
    require(layer >= 0 && layer < depth, ErrorKind::Validation,
            "layer " + std::to_string(requested) + " outside model depth " + std::to_string(depth));
    return static_cast<std::size_t>(layer);
}

LabeledDataset load_dataset(const DataConfig& d) {
    LabeledDataset ds;
    if (d.source == "blobs") {
        ds = gen_blobs(d.blobs);
    } else if (d.source == "idx") {
        require(!d.idx_images.empty() && !d.idx_labels.empty(), ErrorKind::Validation,
                "data.source=idx needs data.idx.images and data.idx.labels");
        ds = load_idx(d.idx_images, d.idx_labels);
    } else {
        require(!d.csv_path.empty(), ErrorKind::Validation, "data.source=csv needs data.csv.path");
        ds = load_dataset_csv(d.csv_path);
    }
    if (d.max_samples > 0) ds = subsample(ds, d.max_samples, d.split_seed);
    if (!ds.grouped()) ds = apply_grouping(ds, GroupMapping::threshold(d.group_threshold));
    return ds;
}

DatasetSplit prepare_splits(const DataConfig& data) {
    return split(load_dataset(data), data.fractions, data.split_seed);
}

TrainResult train_method(const ExperimentConfig& config, const LabeledDataset& train_set, LossKind method,
                         std::uint64_t seed) {
    const auto sizes = config.layer_sizes(train_set.features.cols());
    const auto acts = config.activations();
    TrainConfig tc = config.train;
    tc.loss = config.loss_for(method);
    tc.seed = seed;
    return train(init_model(sizes, acts, seed), train_set.training_view(), tc);
}

const LabeledDataset& pick_split(const DatasetSplit& parts, const std::string& name) {
    if (name == "train") return parts.train;
    if (name == "validation") return parts.validation;
    if (name == "test") return parts.test;
    fail(ErrorKind::Validation, "unknown split '" + name + "' (train, validation, test)");
}

std::vector<SummaryRow> summarize(const std::vector<RunRow>& rows) {
    std::vector<SummaryRow> out;
    std::vector<std::vector<const RunRow*>> members;
    for (const auto& r : rows) {
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const SummaryRow& s) { return s.method == r.method && s.split == r.split; });
        if (it == out.end()) {
            out.push_back({r.method, r.split});
            members.emplace_back();
            it = out.end() - 1;
        }
        members[static_cast<std::size_t>(it - out.begin())].push_back(&r);
    }
    auto stats = [](const std::vector<const RunRow*>& m, double RunRow::*field, double& mean, double& sd) {
        double s = 0.0;
        for (const auto* r : m) s += r->*field;
        mean = s / static_cast<double>(m.size());
        double ss = 0.0;
        for (const auto* r : m) ss += (r->*field - mean) * (r->*field - mean);
        sd = m.size() > 1 ? std::sqrt(ss / static_cast<double>(m.size() - 1)) : 0.0;
    };
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].runs = members[i].size();
        stats(members[i], &RunRow::ami, out[i].ami_mean, out[i].ami_std);
        stats(members[i], &RunRow::nmi, out[i].nmi_mean, out[i].nmi_std);
        stats(members[i], &RunRow::train_acc, out[i].train_acc_mean, out[i].train_acc_std);
    }
    return out;
}

std::string results_csv(const std::vector<RunRow>& rows) {
    std::string out = "method,seed,split,ami,nmi,train_acc\n";
    for (const auto& r : rows)
        out += r.method + "," + std::to_string(r.seed) + "," + r.split + "," + format_double(r.ami) + "," +
               format_double(r.nmi) + "," + format_double(r.train_acc) + "\n";
    return out;
}

std::string spread_csv(const std::vector<SpreadRow>& rows) {
    std::string out = "method,seed,active_neurons,test_acc\n";
    for (const auto& r : rows)
        out += r.method + "," + std::to_string(r.seed) + "," + std::to_string(r.active_neurons) + "," +
               format_double(r.test_acc) + "\n";
    return out;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    require(!config.methods.empty(), ErrorKind::Validation, "experiment.methods is empty");
    const DatasetSplit parts = prepare_splits(config.data);
    const std::size_t layer = config.representation_layer(config.layer);

    ExperimentReport report;
    for (LossKind method : config.methods) {
        for (std::uint64_t seed : config.seeds) {
            const std::string name = method_name(method);
            try {
                const auto trained = train_method(config, parts.train, method, seed);
                const double train_acc = binary_accuracy(forward(trained.model, parts.train.features).yhat,
                                                         parts.train.group_labels);
                for (const auto* split_name : {"validation", "test"}) {
                    const LabeledDataset& part = pick_split(parts, split_name);
                    const DenseMatrix emb = embed(trained.model, part.features, layer);
                    KMeansOptions ko = config.cluster;
                    ko.seed = seed;
                    const auto cl = kmeans(emb, ko);
                    const auto sc = score(part.fine_labels, cl.assignments, config.ami_norm, config.nmi_norm);
                    report.rows.push_back({name, seed, split_name, sc.ami, sc.nmi, train_acc});
                }
                const DenseMatrix val_emb = embed(trained.model, parts.validation.features, layer);
                report.spread.push_back(
                    {name, seed, count_spread_neurons(val_emb, config.spread_fraction),
                     binary_accuracy(forward(trained.model, parts.test.features).yhat, parts.test.group_labels)});
            } catch (const Error& err) {
                if (!config.output_dir.empty())
                    write_file_atomic(config.output_dir / "results.partial.csv", results_csv(report.rows));
                fail(err.kind(), "method=" + name + " seed=" + std::to_string(seed) + ": " + err.what());
            }
        }
    }
    report.summary = summarize(report.rows);
    report.provenance = {{"config", config.echo}, {"version", code_version()}, {"timestamp", utc_timestamp()}};
    return report;
}

json report_json(const ExperimentReport& report) {
    json runs = json::array();
    for (const auto& r : report.rows)
        runs.push_back({{"method", r.method}, {"seed", r.seed}, {"split", r.split}, {"ami", r.ami},
                        {"nmi", r.nmi}, {"train_acc", r.train_acc}});
    json summary = json::array();
    for (const auto& s : report.summary)
        summary.push_back({{"method", s.method},
                           {"split", s.split},
                           {"runs", s.runs},
                           {"ami_mean", s.ami_mean},
                           {"ami_std", s.ami_std},
                           {"nmi_mean", s.nmi_mean},
                           {"nmi_std", s.nmi_std},
                           {"train_acc_mean", s.train_acc_mean},
                           {"train_acc_std", s.train_acc_std}});
    json spread = json::array();
    for (const auto& s : report.spread)
        spread.push_back({{"method", s.method}, {"seed", s.seed}, {"active_neurons", s.active_neurons},
                          {"test_acc", s.test_acc}});
    return {{"provenance", report.provenance}, {"runs", runs}, {"summary", summary}, {"active_neurons", spread}};
}

void write_report(const ExperimentReport& report, const std::filesystem::path& dir) {
    write_file_atomic(dir / "results.csv", results_csv(report.rows));
    write_file_atomic(dir / "spread.csv", spread_csv(report.spread));
    write_file_atomic(dir / "report.json", report_json(report).dump(2) + "\n");
    std::error_code ec;
    std::filesystem::remove(dir / "results.partial.csv", ec);
}

std::vector<SweepRow> sweep_k(const ExperimentConfig& config, std::size_t k_min, std::size_t k_max,
                              const std::string& split_name) {
    config.validate();
    const DatasetSplit parts = prepare_splits(config.data);
    const LabeledDataset& part = pick_split(parts, split_name);
    require(k_min >= 2 && k_min <= k_max && k_max <= part.size(), ErrorKind::Validation,
            "sweep needs 2 <= k_min <= k_max <= " + std::to_string(part.size()));
    const std::size_t layer = config.representation_layer(config.layer);

    std::vector<SweepRow> rows;
    for (LossKind method : config.methods)
        for (std::uint64_t seed : config.seeds) {
            const std::string name = method_name(method);
            try {
                const auto trained = train_method(config, parts.train, method, seed);
                const DenseMatrix emb = embed(trained.model, part.features, layer);
                for (std::size_t k = k_min; k <= k_max; ++k) {
                    KMeansOptions ko = config.cluster;
                    ko.k = k;
                    ko.seed = seed;
                    const auto cl = kmeans(emb, ko);
                    rows.push_back({name, seed, k, ami(part.fine_labels, cl.assignments, config.ami_norm)});
                }
            } catch (const Error& err) {
                fail(err.kind(), "method=" + name + " seed=" + std::to_string(seed) + ": " + err.what());
            }
        }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "method,seed,k,ami\n";
    for (const auto& r : rows)
        out += r.method + "," + std::to_string(r.seed) + "," + std::to_string(r.k) + "," + format_double(r.ami) + "\n";
    return out;
}

std::string histogram_csv(const ActivationHistogram& h) {
    std::string out = "class,neuron,count\n";
    for (std::size_t c = 0; c < h.classes; ++c)
        for (std::size_t t = 0; t < h.neurons; ++t)
            out += std::to_string(c) + "," + std::to_string(t) + "," + std::to_string(h(c, t)) + "\n";
    return out;
}

std::string pca_tsv(const DenseMatrix& activations, const LabeledDataset& ds) {
    require(activations.rows() == ds.size(), ErrorKind::Shape, "pca export: row count mismatch");
    DenseMatrix pcs(activations.rows(), 2);
    if (activations.cols() >= 2) {
        pcs = pca_project(activations, 2).projected;
    } else {
        const auto one = pca_project(activations, 1).projected;
        for (std::size_t i = 0; i < one.rows(); ++i) pcs(i, 0) = one(i, 0);
    }
    std::string out = "pc1\tpc2\tfine_label\tgroup_label\n";
    for (std::size_t i = 0; i < ds.size(); ++i)
        out += format_double(pcs(i, 0)) + "\t" + format_double(pcs(i, 1)) + "\t" +
               std::to_string(ds.fine_labels[i]) + "\t" +
               std::to_string(ds.grouped() ? ds.group_labels[i] : -1) + "\n";
    return out;
}

DiagnosticsFiles export_diagnostics(const MlpModel& model, const LabeledDataset& ds, std::size_t layer,
                                    const std::filesystem::path& dir, const std::string& prefix) {
    require(layer < model.depth(), ErrorKind::InvalidInput,
            "diagnostics: layer " + std::to_string(layer) + " outside model depth " + std::to_string(model.depth()));
    const DenseMatrix act = embed(model, ds.features, layer);
    DiagnosticsFiles files{dir / (prefix + "histogram.csv"), dir / (prefix + "pca.tsv")};
    write_file_atomic(files.histogram, histogram_csv(activation_histogram(act, ds.fine_labels)));
    write_file_atomic(files.pca, pca_tsv(act, ds));
    return files;
}

std::string code_version() { return DISENT_VERSION; }

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace disent
