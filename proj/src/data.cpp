#include "disent/data.hpp"

#include "disent/error.hpp"
#include "disent/io_util.hpp"
#include "disent/rng.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace disent {

GroupMapping GroupMapping::threshold(int threshold) {
    GroupMapping m;
    m.threshold_ = threshold;
    return m;
}

GroupMapping GroupMapping::table(std::map<int, int> table) {
    for (const auto& [fine, group] : table)
        require(group == 0 || group == 1, ErrorKind::Mapping,
                "group for class " + std::to_string(fine) + " must be 0 or 1");
    GroupMapping m;
    m.table_ = std::move(table);
    return m;
}

int GroupMapping::group_of(int fine_label) const {
    if (threshold_) return fine_label < *threshold_ ? 0 : 1;
    auto it = table_.find(fine_label);
    require(it != table_.end(), ErrorKind::Mapping,
            "class " + std::to_string(fine_label) + " is not covered by the group mapping");
    return it->second;
}

std::string GroupMapping::describe() const {
    if (threshold_) return "threshold:" + std::to_string(*threshold_);
    std::string s = "table:";
    for (const auto& [fine, group] : table_) s += std::to_string(fine) + "=" + std::to_string(group) + ";";
    return s;
}

void LabeledDataset::validate() const {
    const std::size_t n = features.rows();
    require(fine_labels.size() == n, ErrorKind::Consistency,
            "dataset '" + name + "': fine label count differs from sample count");
    require(group_labels.empty() || group_labels.size() == n, ErrorKind::Consistency,
            "dataset '" + name + "': group label count differs from sample count");
    require(features.all_finite(), ErrorKind::Consistency,
            "dataset '" + name + "': non-finite feature");
    for (int c : fine_labels)
        require(c >= 0, ErrorKind::Consistency, "dataset '" + name + "': negative fine label");
    for (std::size_t i = 0; i < group_labels.size(); ++i) {
        require(group_labels[i] == 0 || group_labels[i] == 1, ErrorKind::Consistency,
                "dataset '" + name + "': group labels must be 0 or 1");
        if (mapping)
            require(mapping->group_of(fine_labels[i]) == group_labels[i], ErrorKind::Consistency,
                    "dataset '" + name + "': group label disagrees with its mapping");
    }
}

TrainingView LabeledDataset::training_view() const {
    require(grouped(), ErrorKind::InvalidInput,
            "dataset '" + name + "' has no group labels; apply a grouping first");
    return TrainingView{features, group_labels};
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
    LabeledDataset out;
    out.features = features.select_rows(indices);
    out.name = name;
    out.mapping = mapping;
    out.fine_labels.reserve(indices.size());
    for (auto i : indices) out.fine_labels.push_back(fine_labels[i]);
    if (grouped()) {
        out.group_labels.reserve(indices.size());
        for (auto i : indices) out.group_labels.push_back(group_labels[i]);
    }
    return out;
}

double min_center_distance(const DenseMatrix& centers) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centers.rows(); ++i)
        for (std::size_t j = i + 1; j < centers.rows(); ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < centers.cols(); ++t) {
                const double d = centers(i, t) - centers(j, t);
                s += d * d;
            }
            best = std::min(best, std::sqrt(s));
        }
    return best;
}

LabeledDataset gen_blobs(const BlobOptions& o) {
    require(o.n_classes >= 2, ErrorKind::InvalidConfig, "blobs: need at least two classes");
    require(o.n_classes % 2 == 0, ErrorKind::InvalidConfig,
            "blobs: class count must be even for the half/half grouping");
    require(o.dim >= 2, ErrorKind::InvalidConfig, "blobs: dimension must be >= 2");
    require(o.n_per_class >= 1, ErrorKind::InvalidConfig, "blobs: need at least one sample per class");
    require(std::isfinite(o.center_scale) && o.center_scale > 0.0, ErrorKind::InvalidConfig,
            "blobs: center scale must be > 0");
    require(std::isfinite(o.noise_sigma) && o.noise_sigma >= 0.0, ErrorKind::InvalidConfig,
            "blobs: noise sigma must be >= 0");

    constexpr int kMaxAttempts = 1000;
    std::uint64_t seed = o.seed;
    DenseMatrix centers(o.n_classes, o.dim);
    for (int attempt = 0;; ++attempt, ++seed) {
        require(attempt < kMaxAttempts, ErrorKind::InvalidConfig,
                "blobs: no seed produced centers separated by the required margin");
        Rng rng(mix_seed(seed, 0x63656eULL));
        for (auto& v : centers.data()) v = o.center_scale * rng.normal();
        if (o.min_separation_sigmas <= 0.0 ||
            min_center_distance(centers) > o.min_separation_sigmas * o.noise_sigma)
            break;
    }

    Rng rng(mix_seed(seed, 0x707473ULL));
    LabeledDataset ds;
    const std::size_t n = o.n_per_class * o.n_classes;
    ds.features = DenseMatrix(n, o.dim);
    ds.fine_labels.resize(n);
    ds.group_labels.resize(n);
    const int half = static_cast<int>(o.n_classes / 2);
    ds.mapping = GroupMapping::threshold(half);
    std::size_t row = 0;
    for (std::size_t c = 0; c < o.n_classes; ++c)
        for (std::size_t s = 0; s < o.n_per_class; ++s, ++row) {
            auto dst = ds.features.row(row);
            auto center = centers.row(c);
            for (std::size_t t = 0; t < o.dim; ++t) dst[t] = center[t] + o.noise_sigma * rng.normal();
            ds.fine_labels[row] = static_cast<int>(c);
            ds.group_labels[row] = static_cast<int>(c) < half ? 0 : 1;
        }
    ds.name = "blobs(seed=" + std::to_string(seed) + ")";
    if (seed != o.seed) ds.name += " regenerated from seed " + std::to_string(o.seed);
    ds.validate();
    return ds;
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& what) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    require(in.gcount() == 4, ErrorKind::Format, what + ": truncated header");
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
           std::uint32_t{b[3]};
}

std::string hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08x", v);
    return buf;
}

}  // namespace

LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
    std::ifstream img(images, std::ios::binary);
    require(static_cast<bool>(img), ErrorKind::Io, "cannot open '" + images.string() + "'");
    std::ifstream lab(labels, std::ios::binary);
    require(static_cast<bool>(lab), ErrorKind::Io, "cannot open '" + labels.string() + "'");

    const auto img_magic = read_be32(img, images.string());
    require(img_magic == 0x00000803u, ErrorKind::Format,
            images.string() + ": expected image magic 0x00000803, found " + hex32(img_magic));
    const auto n = read_be32(img, images.string());
    const auto rows = read_be32(img, images.string());
    const auto cols = read_be32(img, images.string());

    const auto lab_magic = read_be32(lab, labels.string());
    require(lab_magic == 0x00000801u, ErrorKind::Format,
            labels.string() + ": expected label magic 0x00000801, found " + hex32(lab_magic));
    const auto n_labels = read_be32(lab, labels.string());
    require(n == n_labels, ErrorKind::Consistency,
            "image count " + std::to_string(n) + " differs from label count " + std::to_string(n_labels));

    const std::size_t d = std::size_t{rows} * cols;
    std::vector<unsigned char> pixels(std::size_t{n} * d);
    img.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    require(static_cast<std::size_t>(img.gcount()) == pixels.size(), ErrorKind::Format,
            images.string() + ": truncated pixel data");
    std::vector<unsigned char> raw_labels(n);
    lab.read(reinterpret_cast<char*>(raw_labels.data()), static_cast<std::streamsize>(n));
    require(static_cast<std::size_t>(lab.gcount()) == raw_labels.size(), ErrorKind::Format,
            labels.string() + ": truncated label data");

    LabeledDataset ds;
    ds.features = DenseMatrix(n, d);
    for (std::size_t i = 0; i < pixels.size(); ++i) ds.features.data()[i] = pixels[i] / 255.0;
    ds.fine_labels.assign(raw_labels.begin(), raw_labels.end());
    ds.name = "idx(" + images.filename().string() + ")";
    ds.validate();
    return ds;
}

LabeledDataset apply_grouping(const LabeledDataset& ds, const GroupMapping& mapping) {
    LabeledDataset out = ds;
    out.group_labels.resize(ds.size());
    bool seen[2] = {false, false};
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const int g = mapping.group_of(ds.fine_labels[i]);
        out.group_labels[i] = g;
        seen[g] = true;
    }
    require(seen[0] && seen[1], ErrorKind::Mapping,
            "grouping " + mapping.describe() + " leaves a group empty");
    out.mapping = mapping;
    out.validate();
    return out;
}

DatasetSplit split(const LabeledDataset& ds, const std::array<double, 3>& fractions,
                   std::uint64_t seed) {
    double sum = 0.0;
    for (double f : fractions) {
        require(std::isfinite(f) && f > 0.0, ErrorKind::InvalidConfig, "split fractions must be > 0");
        sum += f;
    }
    require(std::abs(sum - 1.0) <= 1e-9, ErrorKind::InvalidConfig, "split fractions must sum to 1");
    const std::size_t n = ds.size();
    const auto n_train = static_cast<std::size_t>(std::llround(fractions[0] * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::llround(fractions[1] * static_cast<double>(n)));
    require(n_train >= 1 && n_val >= 1 && n_train + n_val < n, ErrorKind::InvalidConfig,
            "split of " + std::to_string(n) + " samples leaves an empty part");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(seed, 0x73706cULL));
    rng.shuffle(order.begin(), order.end());

    std::span<const std::size_t> all(order);
    DatasetSplit parts{ds.subset(all.subspan(0, n_train)), ds.subset(all.subspan(n_train, n_val)),
                       ds.subset(all.subspan(n_train + n_val))};
    parts.train.name += "/train";
    parts.validation.name += "/validation";
    parts.test.name += "/test";
    parts.train.validate();
    parts.validation.validate();
    parts.test.validate();
    return parts;
}

LabeledDataset subsample(const LabeledDataset& ds, std::size_t count, std::uint64_t seed) {
    if (count >= ds.size()) return ds;
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(seed, 0x737562ULL));
    rng.shuffle(order.begin(), order.end());
    order.resize(count);
    return ds.subset(order);
}

std::string dataset_to_csv(const LabeledDataset& ds) {
    ds.validate();
    std::string out;
    for (std::size_t t = 0; t < ds.features.cols(); ++t) out += "feature_" + std::to_string(t) + ",";
    out += "fine_label,group_label\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (double v : ds.features.row(i)) {
            out += format_double(v);
            out += ',';
        }
        out += std::to_string(ds.fine_labels[i]) + "," +
               std::to_string(ds.grouped() ? ds.group_labels[i] : -1) + "\n";
    }
    return out;
}

namespace {

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

template <class T>
T parse_number(std::string_view s, std::size_t line_no) {
    T v{};
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    require(ec == std::errc{} && end == s.data() + s.size(), ErrorKind::Format,
            "CSV line " + std::to_string(line_no) + ": cannot parse '" + std::string(s) + "'");
    return v;
}

}  // namespace

LabeledDataset dataset_from_csv(const std::string& text, const std::string& name) {
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorKind::Format, "CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    require(header.size() >= 3 && header[header.size() - 2] == "fine_label" &&
                header.back() == "group_label",
            ErrorKind::Format, "CSV header must end with fine_label,group_label");
    const std::size_t d = header.size() - 2;
    for (std::size_t t = 0; t < d; ++t)
        require(header[t] == "feature_" + std::to_string(t), ErrorKind::Format,
                "CSV header column " + std::to_string(t) + " must be feature_" + std::to_string(t));

    std::vector<double> values;
    std::vector<int> fine, group;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        require(fields.size() == header.size(), ErrorKind::Format,
                "CSV line " + std::to_string(line_no) + " has the wrong number of fields");
        for (std::size_t t = 0; t < d; ++t) values.push_back(parse_number<double>(fields[t], line_no));
        fine.push_back(parse_number<int>(fields[d], line_no));
        group.push_back(parse_number<int>(fields[d + 1], line_no));
    }

    LabeledDataset ds;
    ds.features = DenseMatrix(fine.size(), d, std::move(values));
    ds.fine_labels = std::move(fine);
    const bool ungrouped = std::all_of(group.begin(), group.end(), [](int g) { return g == -1; });
    if (!ungrouped) ds.group_labels = std::move(group);
    ds.name = name;
    ds.validate();
    return ds;
}

void save_dataset_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
    write_file_atomic(path, dataset_to_csv(ds));
}

LabeledDataset load_dataset_csv(const std::filesystem::path& path) {
    return dataset_from_csv(read_file(path), path.filename().string());
}

}  // namespace disent
