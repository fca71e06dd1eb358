#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "auricle/errors.hpp"
#include "auricle/manifest.hpp"

using namespace auricle;
namespace fs = std::filesystem;

namespace {

fs::path write_manifest_text(const char* name, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream f(p, std::ios::trunc);
    f << text;
    REQUIRE(bool(f));
    return p;
}

}  // namespace

TEST_CASE("manifest: two well-formed lines load in order") {
    const fs::path p = write_manifest_text("auricle_m1.jsonl",
                                           "{\"path\":\"a.wav\",\"label\":0}\n"
                                           "{\"path\":\"b.wav\",\"label\":3}\n");
    const auto entries = load_manifest(p.string());
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].path == (p.parent_path() / "a.wav").string());
    CHECK(entries[0].label == 0);
    CHECK(entries[1].path == (p.parent_path() / "b.wav").string());
    CHECK(entries[1].label == 3);
    fs::remove(p);
}

TEST_CASE("manifest: label is optional") {
    const fs::path p = write_manifest_text("auricle_m2.jsonl", "{\"path\":\"x.wav\"}\n");
    const auto entries = load_manifest(p.string());
    REQUIRE(entries.size() == 1);
    CHECK_FALSE(entries[0].has_label());
    fs::remove(p);
}

TEST_CASE("manifest: blank lines are skipped") {
    const fs::path p = write_manifest_text("auricle_m3.jsonl",
                                           "\n{\"path\":\"x.wav\"}\n\n\n{\"path\":\"y.wav\"}\n");
    CHECK(load_manifest(p.string()).size() == 2);
    fs::remove(p);
}

TEST_CASE("manifest: missing path cites line 1") {
    const fs::path p = write_manifest_text("auricle_m4.jsonl", "{\"label\":2}\n");
    try {
        load_manifest(p.string());
        FAIL("expected ManifestError");
    } catch (const ManifestError& e) {
        // 1-based line number in the file:line style.
        CHECK(std::string(e.what()).find(p.string() + ":1") != std::string::npos);
    }
    fs::remove(p);
}

TEST_CASE("manifest: error on a later line cites that line number") {
    const fs::path p = write_manifest_text("auricle_m5.jsonl",
                                           "{\"path\":\"ok.wav\"}\n"
                                           "not json at all\n");
    try {
        load_manifest(p.string());
        FAIL("expected ManifestError");
    } catch (const ManifestError& e) {
        CHECK(std::string(e.what()).find(p.string() + ":2") != std::string::npos);
    }
    fs::remove(p);
}

TEST_CASE("manifest: negative label is rejected") {
    const fs::path p =
        write_manifest_text("auricle_m6.jsonl", "{\"path\":\"x.wav\",\"label\":-4}\n");
    CHECK_THROWS_AS(load_manifest(p.string()), ManifestError);
    fs::remove(p);
}

TEST_CASE("manifest: empty file gives an empty list") {
    const fs::path p = write_manifest_text("auricle_m7.jsonl", "");
    CHECK(load_manifest(p.string()).empty());
    fs::remove(p);
}

TEST_CASE("manifest: absolute paths pass through untouched") {
    const fs::path p =
        write_manifest_text("auricle_m8.jsonl", "{\"path\":\"/abs/elsewhere.wav\"}\n");
    const auto entries = load_manifest(p.string());
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].path == "/abs/elsewhere.wav");
    fs::remove(p);
}

TEST_CASE("manifest: save then load round-trips entries") {
    const fs::path p = fs::temp_directory_path() / "auricle_m9.jsonl";
    std::vector<ManifestEntry> entries{{"/a/b.wav", 1}, {"/c/d.wav", -1}};
    save_manifest(p.string(), entries);
    const auto back = load_manifest(p.string());
    REQUIRE(back.size() == 2);
    CHECK(back[0].path == "/a/b.wav");
    CHECK(back[0].label == 1);
    CHECK(back[1].path == "/c/d.wav");
    CHECK_FALSE(back[1].has_label());
    fs::remove(p);
}

TEST_CASE("manifest: missing file throws IoError") {
    CHECK_THROWS_AS(load_manifest("/nonexistent/auricle.jsonl"), IoError);
}
