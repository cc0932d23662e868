#include "disent/data.hpp"
#include "disent/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <vector>

#include <unistd.h>

using namespace disent;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("disent_data_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void push_be32(std::vector<unsigned char>& b, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<unsigned char>(v >> s));
}

std::vector<unsigned char> idx_images(std::uint32_t magic, std::uint32_t n) {
    std::vector<unsigned char> b;
    push_be32(b, magic);
    push_be32(b, n);
    push_be32(b, 28);
    push_be32(b, 28);
    for (std::uint32_t i = 0; i < n * 784; ++i) b.push_back(static_cast<unsigned char>(i % 3 == 0 ? 255 : 0));
    return b;
}

std::vector<unsigned char> idx_labels(std::uint32_t magic, std::uint32_t n) {
    std::vector<unsigned char> b;
    push_be32(b, magic);
    push_be32(b, n);
    for (std::uint32_t i = 0; i < n; ++i) b.push_back(static_cast<unsigned char>(i % 10));
    return b;
}

std::vector<std::vector<double>> sorted_rows(const LabeledDataset& ds) {
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < ds.size(); ++r) {
        auto row = ds.features.row(r);
        std::vector<double> v(row.begin(), row.end());
        v.push_back(ds.fine_labels[r]);
        v.push_back(ds.group_labels[r]);
        rows.push_back(std::move(v));
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

}  // namespace

TEST_CASE("gen_blobs counts and grouping") {
    auto ds = gen_blobs({});
    CHECK(ds.size() == 1000);
    CHECK(ds.features.cols() == 20);
    CHECK(std::count(ds.group_labels.begin(), ds.group_labels.end(), 0) == 500);
    for (std::size_t i = 0; i < ds.size(); ++i)
        CHECK(ds.group_labels[i] == (ds.fine_labels[i] < 5 ? 0 : 1));
}

TEST_CASE("gen_blobs with zero noise puts every sample on its center") {
    BlobOptions o;
    o.noise_sigma = 0.0;
    o.n_per_class = 4;
    auto ds = gen_blobs(o);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const std::size_t first = static_cast<std::size_t>(ds.fine_labels[i]) * 4;
        for (std::size_t t = 0; t < ds.features.cols(); ++t) CHECK(ds.features(i, t) == ds.features(first, t));
    }
}

TEST_CASE("gen_blobs is deterministic per seed and centers are separated") {
    BlobOptions o;
    CHECK(gen_blobs(o).features == gen_blobs(o).features);
    o.seed = 2;
    CHECK_FALSE(gen_blobs(o).features == gen_blobs(BlobOptions{}).features);

    // Class means recovered from a noiseless draw.
    o.noise_sigma = 0.0;
    o.n_per_class = 1;
    auto centers = gen_blobs(o).features;
    CHECK(min_center_distance(centers) > 4.0 * BlobOptions{}.noise_sigma);
}

TEST_CASE("gen_blobs regenerates when the separation guard fails") {
    // Ten centers in 2-D rarely sit more than 0.4 apart, so the first seed fails.
    BlobOptions o;
    o.dim = 2;
    o.n_per_class = 1;
    o.noise_sigma = 0.0;
    o.min_separation_sigmas = 0.0;
    CHECK(min_center_distance(gen_blobs(o).features) <= 0.4);

    o.noise_sigma = 0.1;
    o.min_separation_sigmas = 4.0;
    auto ds = gen_blobs(o);
    CHECK(ds.name.find("regenerated from seed 1") != std::string::npos);

    o.min_separation_sigmas = 1e6;
    CHECK_THROWS_AS(gen_blobs(o), Error);
}

TEST_CASE("gen_blobs rejects bad configs") {
    BlobOptions o;
    o.n_classes = 3;
    CHECK_THROWS_AS(gen_blobs(o), Error);
    o = {};
    o.dim = 1;
    CHECK_THROWS_AS(gen_blobs(o), Error);
    o = {};
    o.n_per_class = 0;
    CHECK_THROWS_AS(gen_blobs(o), Error);
}

TEST_CASE("load_idx parses headers and rescales pixels") {
    TempDir dir;
    write_bytes(dir.path / "img", idx_images(0x803, 2));
    write_bytes(dir.path / "lab", idx_labels(0x801, 2));
    auto ds = load_idx(dir.path / "img", dir.path / "lab");
    CHECK(ds.features.rows() == 2);
    CHECK(ds.features.cols() == 784);
    CHECK(ds.features(0, 0) == 1.0);
    CHECK(ds.features(0, 1) == 0.0);
    CHECK(ds.fine_labels == std::vector<int>{0, 1});
    CHECK_FALSE(ds.grouped());
}

TEST_CASE("load_idx errors") {
    TempDir dir;
    write_bytes(dir.path / "img", idx_images(0x804, 2));
    write_bytes(dir.path / "lab", idx_labels(0x801, 2));
    try {
        load_idx(dir.path / "img", dir.path / "lab");
        FAIL("expected format error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Format);
        CHECK(std::string(e.what()).find("0x00000804") != std::string::npos);
    }

    write_bytes(dir.path / "img", idx_images(0x803, 2));
    write_bytes(dir.path / "lab", idx_labels(0x801, 3));
    try {
        load_idx(dir.path / "img", dir.path / "lab");
        FAIL("expected consistency error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Consistency);
    }

    CHECK_THROWS_AS(load_idx(dir.path / "missing", dir.path / "lab"), Error);
}

TEST_CASE("apply_grouping") {
    LabeledDataset ds;
    ds.features = DenseMatrix(10, 2);
    for (int c = 0; c < 10; ++c) ds.fine_labels.push_back(c);
    auto g = apply_grouping(ds, GroupMapping::threshold(5));
    CHECK(g.group_labels == std::vector<int>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1});
    CHECK(g.features == ds.features);
    CHECK(g.fine_labels == ds.fine_labels);

    auto twice = apply_grouping(g, GroupMapping::threshold(5));
    CHECK(twice.group_labels == g.group_labels);

    std::map<int, int> all_zero;
    for (int c = 0; c < 10; ++c) all_zero[c] = 0;
    CHECK_THROWS_AS(apply_grouping(ds, GroupMapping::table(all_zero)), Error);

    std::map<int, int> partial{{0, 0}, {1, 1}};
    try {
        apply_grouping(ds, GroupMapping::table(partial));
        FAIL("expected mapping error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Mapping);
    }
}

TEST_CASE("split sizes, determinism and partition") {
    auto ds = gen_blobs({});
    auto parts = split(ds, {0.8, 0.1, 0.1}, 7);
    CHECK(parts.train.size() == 800);
    CHECK(parts.validation.size() == 100);
    CHECK(parts.test.size() == 100);

    auto again = split(ds, {0.8, 0.1, 0.1}, 7);
    CHECK(again.train.features == parts.train.features);
    CHECK(again.test.fine_labels == parts.test.fine_labels);

    std::vector<std::vector<double>> joined;
    for (const auto* part : {&parts.train, &parts.validation, &parts.test}) {
        auto rows = sorted_rows(*part);
        joined.insert(joined.end(), rows.begin(), rows.end());
    }
    std::sort(joined.begin(), joined.end());
    CHECK(joined == sorted_rows(ds));

    CHECK_THROWS_AS(split(ds, {0.8, 0.1, 0.2}, 1), Error);
    CHECK_THROWS_AS(split(ds, {1.0, 0.0, 0.0}, 1), Error);
    auto tiny = ds.subset(std::vector<std::size_t>{0, 1});
    CHECK_THROWS_AS(split(tiny, {0.8, 0.1, 0.1}, 1), Error);
}

TEST_CASE("subsample keeps count and is seeded") {
    auto ds = gen_blobs({});
    auto a = subsample(ds, 50, 3);
    CHECK(a.size() == 50);
    CHECK(subsample(ds, 50, 3).features == a.features);
    CHECK(subsample(ds, 5000, 3).size() == ds.size());
}

TEST_CASE("CSV round trip") {
    BlobOptions o;
    o.n_per_class = 3;
    o.dim = 4;
    auto ds = gen_blobs(o);
    auto back = dataset_from_csv(dataset_to_csv(ds));
    CHECK(back.features == ds.features);
    CHECK(back.fine_labels == ds.fine_labels);
    CHECK(back.group_labels == ds.group_labels);

    const std::string head = dataset_to_csv(ds).substr(0, dataset_to_csv(ds).find('\n'));
    CHECK(head == "feature_0,feature_1,feature_2,feature_3,fine_label,group_label");

    LabeledDataset ungrouped = ds;
    ungrouped.group_labels.clear();
    ungrouped.mapping.reset();
    auto u = dataset_from_csv(dataset_to_csv(ungrouped));
    CHECK_FALSE(u.grouped());

    CHECK_THROWS_AS(dataset_from_csv("feature_0,fine_label,group_label\n1.0,x,0\n"), Error);
    CHECK_THROWS_AS(dataset_from_csv("a,b\n"), Error);
}
