#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "pmivec/storage.hpp"

using namespace pmivec;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("pmivec_storage_" + std::to_string(splitmix64(std::random_device{}())));
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Vocabulary small_vocab() {
    VocabBuilder b;
    for (int i = 0; i < 5; ++i) b.add("alpha");
    for (int i = 0; i < 3; ++i) b.add("beta");
    for (int i = 0; i < 3; ++i) b.add("aeta");
    b.add("gamma");
    b.add("gamma");
    b.add("dropme");
    return std::move(b).finish(2);
}

CoocMatrix small_cooc(std::uint64_t seed) {
    Rng rng(seed);
    Vocabulary v = small_vocab();
    std::vector<WordId> stream(400);
    for (auto& w : stream) w = static_cast<WordId>(rng.next_below(v.size()));
    return count_cooccurrences(stream, v, 2, true, SubsampleParams::disabled());
}

}  // namespace

TEST_SUITE_BEGIN("storage");

TEST_CASE("vocabulary file round-trips with header and id order") {
    TempDir tmp;
    Vocabulary v = small_vocab();
    REQUIRE(v.size() == 4);  // dropme falls below min_count 2
    fs::path p = tmp.path / "vocab.tsv";
    save_vocabulary(v, p);

    std::string text = slurp(p);
    CHECK(text.starts_with("#total_tokens\t13\n"));
    CHECK(text.ends_with("\n"));
    CHECK(text == "#total_tokens\t13\nalpha\t5\naeta\t3\nbeta\t3\ngamma\t2\n");

    Vocabulary back = load_vocabulary(p);
    CHECK(back.words == v.words);
    CHECK(back.counts == v.counts);
    CHECK(back.total_tokens == v.total_tokens);
    CHECK(back.min_count == 2);  // smallest retained count
    CHECK(back.id_of("aeta") == v.id_of("aeta"));
}

TEST_CASE("vocabulary loader rejects malformed files") {
    TempDir tmp;
    auto write = [&](const char* name, const std::string& content) {
        fs::path p = tmp.path / name;
        std::ofstream(p) << content;
        return p;
    };
    CHECK_THROWS_AS(load_vocabulary(write("noheader", "alpha\t5\n")), Error);
    CHECK_THROWS_AS(load_vocabulary(write("badsum", "#total_tokens\t99\nalpha\t5\n")), Error);
    CHECK_THROWS_AS(
        load_vocabulary(write("dup", "#total_tokens\t10\nalpha\t5\nalpha\t5\n")), Error);
    CHECK_THROWS_AS(
        load_vocabulary(write("order", "#total_tokens\t8\nbeta\t3\nalpha\t5\n")), Error);
    CHECK_THROWS_AS(load_vocabulary(write("count", "#total_tokens\t5\nalpha\tfive\n")), Error);
    CHECK_THROWS_AS(load_vocabulary(tmp.path / "missing.tsv"), Error);
    try {
        load_vocabulary(write("badsum2", "#total_tokens\t99\nalpha\t5\n"));
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
    }
}

TEST_CASE("embedding save/load round-trips within format precision") {
    TempDir tmp;
    Embeddings emb = init_embeddings(7, 10, 6, 55);
    Vocabulary v;
    for (int i = 0; i < 7; ++i) {
        v.words.push_back("word" + std::to_string(i));
        v.counts.push_back(10 - static_cast<std::uint64_t>(i));
    }
    v.total_tokens = 49;
    v.rebuild_index();

    fs::path p = tmp.path / "vecs.txt";
    save_embeddings(emb, v, p);
    WordVectors wv = load_embeddings(p);
    REQUIRE(wv.words.size() == 7);
    CHECK(wv.dim() == 6);
    CHECK(wv.words == v.words);
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t j = 0; j < 6; ++j)
            CHECK(wv.W.row(i)[j] == doctest::Approx(emb.W.row(i)[j]).epsilon(1e-5));
}

TEST_CASE("embedding file layout: header plus one line per word") {
    TempDir tmp;
    Embeddings emb = init_embeddings(2, 4, 2, 3);
    Vocabulary v;
    v.words = {"aa", "bb"};
    v.counts = {2, 1};
    v.total_tokens = 3;
    v.rebuild_index();
    fs::path p = tmp.path / "two.txt";
    save_embeddings(emb, v, p);

    std::string text = slurp(p);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);  // header + 2 rows
    CHECK(text.starts_with("2 2\n"));
}

TEST_CASE("loading a hand-written fixture gives the written values") {
    TempDir tmp;
    fs::path p = tmp.path / "fixture.txt";
    std::ofstream(p) << "3 2\nfoo 0.25 -1.5\nbar 3e-05 42\nbaz -0.125 0.5\n";
    WordVectors wv = load_embeddings(p);
    REQUIRE(wv.words.size() == 3);
    CHECK(wv.W.row(0)[0] == 0.25);
    CHECK(wv.W.row(0)[1] == -1.5);
    CHECK(wv.W.row(1)[0] == 3e-05);
    CHECK(wv.W.row(1)[1] == 42.0);
    CHECK(*wv.id_of("baz") == 2);
}

TEST_CASE("embedding loader rejects malformed files with line numbers") {
    TempDir tmp;
    auto write = [&](const char* name, const std::string& content) {
        fs::path p = tmp.path / name;
        std::ofstream(p) << content;
        return p;
    };
    CHECK_THROWS_WITH_AS(load_embeddings(write("short", "2 3\nfoo 1 2 3\nbar 1 2\n")),
                         doctest::Contains(":3:"), Error);
    CHECK_THROWS_WITH_AS(load_embeddings(write("long", "2 3\nfoo 1 2 3 4\nbar 1 2 3\n")),
                         doctest::Contains(":2:"), Error);
    CHECK_THROWS_WITH_AS(load_embeddings(write("dup", "2 2\nfoo 1 2\nfoo 3 4\n")),
                         doctest::Contains("duplicate word 'foo'"), Error);
    CHECK_THROWS_AS(load_embeddings(write("missing", "3 2\nfoo 1 2\nbar 3 4\n")), Error);
    CHECK_THROWS_AS(load_embeddings(write("extra", "1 2\nfoo 1 2\nbar 3 4\n")), Error);
    CHECK_THROWS_AS(load_embeddings(write("header", "x y\nfoo 1 2\n")), Error);
    CHECK_THROWS_AS(load_embeddings(write("value", "1 2\nfoo 1 two\n")), Error);
}

TEST_CASE("saving a loaded canonical embedding file is byte-identical") {
    TempDir tmp;
    Embeddings emb = init_embeddings(5, 8, 4, 77);
    Vocabulary v;
    for (int i = 0; i < 5; ++i) {
        v.words.push_back("w" + std::to_string(i));
        v.counts.push_back(9 - static_cast<std::uint64_t>(i));
    }
    v.total_tokens = 35;
    v.rebuild_index();

    fs::path p1 = tmp.path / "canon.txt";
    save_embeddings(emb, v, p1);
    WordVectors wv = load_embeddings(p1);
    fs::path p2 = tmp.path / "resaved.txt";
    save_embeddings(wv.W, wv.words, p2);
    CHECK(slurp(p1) == slurp(p2));

    // same idempotence for the vocabulary format
    Vocabulary sv = small_vocab();
    fs::path v1 = tmp.path / "v1.tsv";
    save_vocabulary(sv, v1);
    fs::path v2 = tmp.path / "v2.tsv";
    save_vocabulary(load_vocabulary(v1), v2);
    CHECK(slurp(v1) == slurp(v2));
}

TEST_CASE("context embeddings are saved with positional labels on request") {
    TempDir tmp;
    Vocabulary v = small_vocab();
    Rng rng(8);
    std::vector<WordId> stream(200);
    for (auto& w : stream) w = static_cast<WordId>(rng.next_below(v.size()));
    CoocMatrix m = count_cooccurrences(stream, v, 2, true, SubsampleParams::disabled());
    Embeddings emb = init_embeddings(m.vocab_size, m.ctx_size, 4, 5);

    fs::path p = tmp.path / "ctx.txt";
    save_context_embeddings(emb, v, m, p);
    WordVectors wv = load_embeddings(p);
    CHECK(wv.words.size() == m.ctx_size);
    CHECK(wv.id_of("alpha@-2").has_value());
    CHECK(wv.id_of("alpha@+1").has_value());
}

TEST_CASE("cooccurrence binary round-trip is cell-exact") {
    TempDir tmp;
    CoocMatrix m = small_cooc(11);
    fs::path p = tmp.path / "m.cooc";
    save_cooc(m, p);
    CoocMatrix back = load_cooc(p);
    CHECK(back.vocab_size == m.vocab_size);
    CHECK(back.ctx_size == m.ctx_size);
    CHECK(back.window == m.window);
    CHECK(back.positional == m.positional);
    CHECK(back.row_ptr == m.row_ptr);
    CHECK(back.cell_ctx == m.cell_ctx);
    CHECK(back.cell_count == m.cell_count);
    CHECK(back.row_marginals == m.row_marginals);
    CHECK(back.col_marginals == m.col_marginals);
    CHECK(back.grand_total == m.grand_total);

    // byte-identical re-save
    fs::path p2 = tmp.path / "m2.cooc";
    save_cooc(back, p2);
    CHECK(slurp(p) == slurp(p2));
}

TEST_CASE("cooccurrence loader rejects corruption") {
    TempDir tmp;
    CoocMatrix m = small_cooc(13);
    fs::path p = tmp.path / "m.cooc";
    save_cooc(m, p);
    std::string bytes = slurp(p);

    auto write_bytes = [&](const char* name, std::string blob) {
        fs::path q = tmp.path / name;
        std::ofstream(q, std::ios::binary) << blob;
        return q;
    };

    SUBCASE("bad magic") {
        std::string bad = bytes;
        bad[0] = 'X';
        CHECK_THROWS_WITH_AS(load_cooc(write_bytes("magic.cooc", bad)),
                             doctest::Contains("magic"), Error);
    }
    SUBCASE("truncated record") {
        std::string bad = bytes.substr(0, bytes.size() - 7);
        CHECK_THROWS_WITH_AS(load_cooc(write_bytes("trunc.cooc", bad)),
                             doctest::Contains("truncated"), Error);
    }
    // header is 29 bytes: magic + version + vocab + ctx + window + flag + total
    SUBCASE("unsorted records") {
        std::string bad = bytes;
        REQUIRE(bad.size() >= 29 + 32);
        std::swap_ranges(bad.begin() + 29, bad.begin() + 45, bad.begin() + 45);
        CHECK_THROWS_WITH_AS(load_cooc(write_bytes("unsorted.cooc", bad)),
                             doctest::Contains("sorted"), Error);
    }
    SUBCASE("a flipped count byte is caught by marginal verification") {
        // flip a high-exponent bit of the first record's count field
        std::string bad = bytes;
        REQUIRE(bad.size() >= 29 + 16);
        bad[29 + 8 + 6] = static_cast<char>(bad[29 + 8 + 6] ^ 0x10);
        CHECK_THROWS_AS(load_cooc(write_bytes("flip.cooc", bad)), Error);
    }
    SUBCASE("bad version") {
        std::string bad = bytes;
        bad[4] = 42;
        CHECK_THROWS_WITH_AS(load_cooc(write_bytes("ver.cooc", bad)),
                             doctest::Contains("version"), Error);
    }
}

TEST_SUITE_END();
