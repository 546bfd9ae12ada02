#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pivq/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace pivq;

namespace {

Codebook sample_codebook() {
    Codebook cb;
    cb.dim = 3;
    cb.entries = {
        {0.1, -2.5, 3.0},
        {1.0 / 3.0, 1e-300, -0.0},
        {6.02214076e23, -1.25, 0.5},
    };
    return cb;
}

std::string temp_path(const std::string& name) {
    return std::string("pivq_io_test_") + name;
}

}  // namespace

TEST_CASE("codebook json round-trips values exactly") {
    Codebook cb = sample_codebook();
    Codebook back = codebook_from_json(codebook_to_json(cb));
    REQUIRE(back.dim == cb.dim);
    REQUIRE(back.entries.size() == cb.entries.size());
    for (std::size_t i = 0; i < cb.entries.size(); ++i) {
        for (std::size_t j = 0; j < cb.dim; ++j) {
            CHECK(back.entries[i][j] == cb.entries[i][j]);
        }
    }
}

TEST_CASE("codebook json rejects malformed input") {
    CHECK_THROWS_AS(codebook_from_json("not json"), ParseError);
    CHECK_THROWS_AS(codebook_from_json("{\"dim\": 2}"), ParseError);
    CHECK_THROWS_AS(codebook_from_json("{\"dim\": 2, \"entries\": []}"), ParseError);
    CHECK_THROWS_AS(codebook_from_json("{\"dim\": 2, \"entries\": [[1.0]]}"), ParseError);
    CHECK_THROWS_AS(codebook_from_json("{\"dim\": 1, \"entries\": [[\"x\"]]}"), ParseError);
}

TEST_CASE("codebook binary round-trips bit-exactly") {
    Codebook cb = sample_codebook();
    std::stringstream buf;
    write_codebook_binary(buf, cb);
    Codebook back = read_codebook_binary(buf);
    REQUIRE(back.dim == cb.dim);
    REQUIRE(back.entries == cb.entries);
}

TEST_CASE("codebook binary rejects corrupt streams") {
    Codebook cb = sample_codebook();
    std::stringstream buf;
    write_codebook_binary(buf, cb);
    std::string bytes = buf.str();

    SUBCASE("corrupt magic") {
        std::string bad = bytes;
        bad[0] = 'X';
        std::stringstream in(bad);
        CHECK_THROWS_AS(read_codebook_binary(in), ParseError);
    }
    SUBCASE("truncated payload") {
        std::stringstream in(bytes.substr(0, bytes.size() - 5));
        CHECK_THROWS_AS(read_codebook_binary(in), ParseError);
    }
    SUBCASE("empty stream") {
        std::stringstream in("");
        CHECK_THROWS_AS(read_codebook_binary(in), ParseError);
    }
}

TEST_CASE("binary scalar helpers are little-endian") {
    std::stringstream buf;
    write_u32_le(buf, 0x01020304u);
    std::string s = buf.str();
    REQUIRE(s.size() == 4);
    CHECK(static_cast<unsigned char>(s[0]) == 0x04);
    CHECK(static_cast<unsigned char>(s[3]) == 0x01);
    std::stringstream in(s);
    CHECK(read_u32_le(in) == 0x01020304u);

    std::stringstream fb;
    write_f64_le(fb, -0.1);
    std::stringstream fin(fb.str());
    double v = read_f64_le(fin);
    CHECK(v == -0.1);
}

TEST_CASE("coded dataset jsonl round-trips and canonicalizes") {
    std::vector<CodedSample> samples;
    samples.push_back({"a", CodeSet::from_indices({5, 1, 3})});
    samples.push_back({"b", CodeSet::from_indices({})});
    samples.push_back({"c", CodeSet::from_indices({2, 2})});

    std::stringstream buf;
    write_coded_dataset(buf, samples);

    // one line per sample, codes sorted
    std::string text = buf.str();
    CHECK(text.find("[1,3,5]") != std::string::npos);

    std::stringstream in(text);
    std::vector<CodedSample> back = read_coded_dataset(in);
    REQUIRE(back.size() == 3);
    CHECK(back[0].id == "a");
    CHECK(back[0].codes == samples[0].codes);
    CHECK(back[1].codes.size() == 0);
    CHECK(back[2].codes.codes() == std::vector<std::uint32_t>{2});
}

TEST_CASE("coded dataset rejects malformed lines") {
    std::stringstream bad1("{\"id\": \"a\"}\n");
    CHECK_THROWS_AS(read_coded_dataset(bad1), ParseError);
    std::stringstream bad2("{\"id\": \"a\", \"codes\": [1,} \n");
    CHECK_THROWS_AS(read_coded_dataset(bad2), ParseError);
    std::stringstream bad3("{\"id\": 3, \"codes\": [1]}\n");
    CHECK_THROWS_AS(read_coded_dataset(bad3), ParseError);
    std::stringstream bad4("{\"id\": \"a\", \"codes\": [-1]}\n");
    CHECK_THROWS_AS(read_coded_dataset(bad4), ParseError);
}

TEST_CASE("embeddings csv round-trips exactly") {
    std::vector<Embedding> xs = {
        {0.1, 0.2},
        {-1.0 / 3.0, 1e-12},
        {123456.789, -0.0},
    };
    std::stringstream buf;
    write_embeddings_csv(buf, xs);
    std::stringstream in(buf.str());
    std::vector<Embedding> back = read_embeddings_csv(in);
    REQUIRE(back.size() == xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        REQUIRE(back[i].size() == xs[i].size());
        for (std::size_t j = 0; j < xs[i].size(); ++j) {
            CHECK(back[i][j] == xs[i][j]);
        }
    }
}

TEST_CASE("embeddings csv rejects ragged or non-numeric rows") {
    std::stringstream ragged("1.0,2.0\n3.0\n");
    CHECK_THROWS_AS(read_embeddings_csv(ragged), ParseError);
    std::stringstream junk("1.0,abc\n");
    CHECK_THROWS_AS(read_embeddings_csv(junk), ParseError);
}

TEST_CASE("embeddings binary round-trips bit-exactly") {
    std::vector<Embedding> xs = {{0.1, -0.25, 3e5}, {1e-7, 2.0, -9.5}};
    std::stringstream buf;
    write_embeddings_binary(buf, xs);
    std::vector<Embedding> back = read_embeddings_binary(buf);
    CHECK(back == xs);

    std::string bytes;
    {
        std::stringstream b2;
        write_embeddings_binary(b2, xs);
        bytes = b2.str();
    }
    bytes[2] = '?';
    std::stringstream in(bytes);
    CHECK_THROWS_AS(read_embeddings_binary(in), ParseError);
}

TEST_CASE("path helpers pick formats by extension and magic") {
    Codebook cb = sample_codebook();

    std::string jpath = temp_path("cb.json");
    std::string bpath = temp_path("cb.bin");
    save_codebook(jpath, cb);
    save_codebook(bpath, cb);

    // JSON file must be human readable; binary must carry the magic.
    {
        std::ifstream in(jpath);
        std::string first;
        std::getline(in, first);
        CHECK(first.find("entries") != std::string::npos);
    }
    {
        std::ifstream in(bpath, std::ios::binary);
        char magic[8] = {};
        in.read(magic, 8);
        CHECK(std::string(magic, 8) == std::string("PIVQCB1\0", 8));
    }

    Codebook from_json = load_codebook(jpath);
    Codebook from_bin = load_codebook(bpath);
    CHECK(from_json.entries == cb.entries);
    CHECK(from_bin.entries == cb.entries);

    CHECK_THROWS_AS(load_codebook(temp_path("missing.bin")), ParseError);

    std::remove(jpath.c_str());
    std::remove(bpath.c_str());
}

TEST_CASE("embedding and coded dataset path helpers round-trip") {
    std::vector<Embedding> xs = {{1.5, -2.5}, {0.25, 0.75}};
    std::string cpath = temp_path("emb.csv");
    {
        std::ofstream out(cpath);
        write_embeddings_csv(out, xs);
    }
    CHECK(load_embeddings(cpath) == xs);
    std::remove(cpath.c_str());

    std::vector<CodedSample> samples;
    samples.push_back({"s1", CodeSet::from_indices({9, 4})});
    std::string dpath = temp_path("codes.jsonl");
    save_coded_dataset(dpath, samples);
    std::vector<CodedSample> back = load_coded_dataset(dpath);
    REQUIRE(back.size() == 1);
    CHECK(back[0].id == "s1");
    CHECK(back[0].codes.codes() == std::vector<std::uint32_t>{4, 9});
    std::remove(dpath.c_str());
}
