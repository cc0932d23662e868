#include "disent/config.hpp"

#include "disent/error.hpp"
#include "disent/io_util.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <sstream>

namespace disent {

using nlohmann::json;

const std::vector<ConfigKey>& config_schema() {
    static const std::vector<ConfigKey> schema = {
        {"data.source", "blobs", "dataset source: blobs, idx or csv"},
        {"data.blobs.n_per_class", 200, "blob samples per fine class"},
        {"data.blobs.n_classes", 10, "number of fine classes (even)"},
        {"data.blobs.dim", 20, "feature dimension"},
        {"data.blobs.center_scale", 1.0, "scale of the Gaussian class centers"},
        {"data.blobs.noise_sigma", 0.5, "per-sample Gaussian noise"},
        {"data.blobs.seed", 1, "generator seed"},
        {"data.blobs.min_separation_sigmas", 4.0,
         "regenerate centers closer than this many noise sigmas (0 disables)"},
        {"data.idx.images", "", "IDX image file (magic 0x00000803)"},
        {"data.idx.labels", "", "IDX label file (magic 0x00000801)"},
        {"data.csv.path", "", "dataset CSV (feature_*,fine_label,group_label)"},
        {"data.max_samples", 0, "seeded subsample size before splitting, 0 keeps all"},
        {"data.group_threshold", 5,
         "fine labels below this go to group 0; used for ungrouped sources"},
        {"data.split.fractions", json::array({0.8, 0.1, 0.1}), "train, validation, test fractions"},
        {"data.split.seed", 1, "split shuffle seed"},
        {"data.output", "", "gen-data output CSV (default <output.dir>/dataset.csv)"},
        {"model.hidden_sizes", json::array({32, 10}), "hidden layer widths; output is one sigmoid unit"},
        {"model.hidden_activation", "relu", "relu, tanh, sigmoid or identity"},
        {"model.path", "", "model JSON written by train, read by embed and diagnostics "
                           "(default <output.dir>/model.json)"},
        {"train.epochs", 50, "training epochs"},
        {"train.batch_size", 128, "minibatch size"},
        {"train.learning_rate", 1e-3, "Adam step size"},
        {"train.shuffle", true, "reshuffle every epoch"},
        {"train.seed", 1, "init and shuffle seed for the train subcommand"},
        {"loss.kind", "baseline", "train subcommand loss: baseline, single, multi, multi2, decov, xcov"},
        {"loss.margin", nullptr, "margin for every hinged loss; null uses the per-kind margin", true},
        {"loss.single.margin", 5.0, "margin of the weight-row loss"},
        {"loss.multi.margin", 0.5, "margin of the labeled activation loss"},
        {"loss.multi2.margin", 0.5, "margin of the unlabeled activation loss"},
        {"loss.weight", 1.0, "lambda multiplying the auxiliary loss"},
        {"loss.target_layer", -1, "layer the auxiliary loss acts on, -1 = penultimate"},
        {"experiment.methods", json::array({"baseline", "single", "multi", "decov", "xcov"}),
         "methods compared by run-experiment and sweep-k"},
        {"experiment.seeds", json::array({1, 2, 3}), "one run per seed (model init, shuffling, kmeans)"},
        {"experiment.layer", -1, "representation layer clustered, -1 = penultimate"},
        {"cluster.k", 10, "number of clusters"},
        {"cluster.n_init", 10, "kmeans restarts"},
        {"cluster.max_iter", 300, "Lloyd iterations per restart"},
        {"cluster.tol", 1e-6, "relative inertia change that stops a restart"},
        {"cluster.seed", 0, "kmeans seed for the cluster subcommand"},
        {"cluster.input", "", "embedding CSV read by cluster (default <output.dir>/embedding.csv)"},
        {"cluster.output", "", "assignment CSV written by cluster (default <output.dir>/clusters.csv)"},
        {"metrics.ami_normalization", "max", "AMI denominator: max, arithmetic, geometric or min"},
        {"metrics.nmi_normalization", "geometric", "NMI denominator: max, arithmetic, geometric or min"},
        {"metrics.spread_fraction", 0.05, "share of samples a neuron must win to count as active"},
        {"output.dir", "out", "directory for reports and default outputs"},
        {"embed.split", "test", "split embedded by embed: train, validation, test or all"},
        {"embed.layer", -1, "layer embedded by embed, -1 = penultimate"},
        {"embed.output", "", "embedding CSV (default <output.dir>/embedding.csv)"},
        {"evaluate.truth", "", "file with reference labels"},
        {"evaluate.pred", "", "file with predicted labels"},
        {"evaluate.truth_column", "fine_label", "column read from a CSV truth file"},
        {"evaluate.pred_column", "cluster", "column read from a CSV prediction file"},
        {"sweep.k_min", 2, "smallest k"},
        {"sweep.k_max", 20, "largest k"},
        {"sweep.split", "test", "split clustered by sweep-k: validation or test"},
        {"diagnostics.split", "validation", "split used for histogram and PCA export"},
        {"diagnostics.layer", -1, "layer exported, -1 = penultimate"},
    };
    return schema;
}

namespace {

const ConfigKey* find_key(const std::string& name) {
    const auto& schema = config_schema();
    auto it = std::find_if(schema.begin(), schema.end(), [&](const ConfigKey& k) { return k.name == name; });
    return it == schema.end() ? nullptr : &*it;
}

std::string valid_keys() {
    std::string out;
    for (const auto& k : config_schema()) out += "\n  " + k.name;
    return out;
}

void flatten(const json& node, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
    if (node.is_object() && !(prefix.size() && find_key(prefix))) {
        for (const auto& [k, v] : node.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
        return;
    }
    out.emplace_back(prefix, node);
}

bool same_shape(const json& def, const json& v) {
    if (def.is_number_integer()) return v.is_number_integer();
    if (def.is_number()) return v.is_number();
    if (def.is_array()) {
        if (!v.is_array()) return false;
        if (def.empty()) return true;
        return std::all_of(v.begin(), v.end(), [&](const json& e) { return same_shape(def.front(), e); });
    }
    return def.type() == v.type();
}

std::string type_name(const json& def) {
    if (def.is_number_integer()) return "integer";
    if (def.is_number()) return "number";
    if (def.is_array()) return "list of " + (def.empty() ? std::string("values") : type_name(def.front()) + "s");
    return def.type_name();
}

json parse_scalar(const std::string& text) {
    auto v = json::parse(text, nullptr, false);
    return v.is_discarded() ? json(text) : v;
}

}  // namespace

Config::Config() {
    for (const auto& k : config_schema()) values_[k.name] = k.default_value;
}

void Config::set_value(const std::string& key, json value) {
    const ConfigKey* k = find_key(key);
    require(k != nullptr, ErrorKind::Validation, "unknown config key '" + key + "'; valid keys:" + valid_keys());
    // Integral doubles are accepted for integer keys, e.g. 10.0.
    if (k->default_value.is_number_integer() && value.is_number_float() &&
        value.get<double>() == static_cast<double>(static_cast<std::int64_t>(value.get<double>())))
        value = static_cast<std::int64_t>(value.get<double>());
    const bool ok = (k->nullable && value.is_null()) || same_shape(k->default_value, value) ||
                    (k->nullable && value.is_number());
    require(ok, ErrorKind::Validation,
            "config key '" + key + "' expects " + (k->nullable ? std::string("a number or null")
                                                                : type_name(k->default_value)) +
                ", got " + value.dump());
    values_[key] = std::move(value);
}

void Config::merge_json(const json& doc) {
    require(doc.is_object(), ErrorKind::Validation, "config document must be a JSON object");
    std::vector<std::pair<std::string, json>> flat;
    flatten(doc, "", flat);
    for (auto& [k, v] : flat) set_value(k, std::move(v));
}

void Config::load_file(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    auto doc = json::parse(text, nullptr, false);
    require(!doc.is_discarded(), ErrorKind::Validation, "config file '" + path.string() + "' is not valid JSON");
    merge_json(doc);
}

void Config::set(std::string_view assignment) {
    const auto eq = assignment.find('=');
    require(eq != std::string_view::npos && eq > 0, ErrorKind::Validation,
            "expected key=value, got '" + std::string(assignment) + "'");
    const std::string key(assignment.substr(0, eq));
    const std::string text(assignment.substr(eq + 1));
    const ConfigKey* k = find_key(key);
    require(k != nullptr, ErrorKind::Validation, "unknown config key '" + key + "'; valid keys:" + valid_keys());

    json value = parse_scalar(text);
    if (k->default_value.is_array() && !value.is_array()) {
        json list = json::array();
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) list.push_back(parse_scalar(item));
        value = std::move(list);
    }
    if (k->default_value.is_string() && !value.is_string()) value = text;
    set_value(key, std::move(value));
}

const json& Config::get(const std::string& key) const {
    auto it = values_.find(key);
    require(it != values_.end(), ErrorKind::Validation, "unknown config key '" + key + "'");
    return it->second;
}

std::string Config::get_string(const std::string& key) const { return get(key).get<std::string>(); }
std::int64_t Config::get_int(const std::string& key) const { return get(key).get<std::int64_t>(); }
double Config::get_double(const std::string& key) const { return get(key).get<double>(); }
bool Config::get_bool(const std::string& key) const { return get(key).get<bool>(); }

std::optional<double> Config::get_optional_double(const std::string& key) const {
    const auto& v = get(key);
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
}

std::vector<std::int64_t> Config::get_ints(const std::string& key) const {
    return get(key).get<std::vector<std::int64_t>>();
}
std::vector<double> Config::get_doubles(const std::string& key) const {
    return get(key).get<std::vector<double>>();
}
std::vector<std::string> Config::get_strings(const std::string& key) const {
    return get(key).get<std::vector<std::string>>();
}

void Config::override_seeds(std::uint64_t seed) {
    const json s = seed;
    values_["experiment.seeds"] = json::array({s});
    for (const char* k : {"data.blobs.seed", "data.split.seed", "train.seed", "cluster.seed"}) values_[k] = s;
}

json Config::to_json() const {
    json out = json::object();
    for (const auto& [k, v] : values_) out[k] = v;
    return out;
}

std::string config_help() {
    std::size_t width = 0;
    for (const auto& k : config_schema()) width = std::max(width, k.name.size());
    std::string out = "Config keys (JSON file via --config, nested objects allowed; override with "
                      "--set key=value):\n";
    for (const auto& k : config_schema()) {
        out += "  " + k.name + std::string(width + 2 - k.name.size(), ' ') + k.help +
               " [default " + k.default_value.dump() + "]\n";
    }
    out += "Environment: DISENT_SEED_OVERRIDE=<int> replaces every seed.\n";
    return out;
}

std::optional<std::uint64_t> seed_override_from_env() {
    const char* raw = std::getenv("DISENT_SEED_OVERRIDE");
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(raw, &end, 10);
    require(end != raw && *end == '\0' && errno == 0 && raw[0] != '-', ErrorKind::Validation,
            std::string("DISENT_SEED_OVERRIDE must be a non-negative integer, got '") + raw + "'");
    return v;
}

}  // namespace disent
