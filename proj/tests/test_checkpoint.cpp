#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <fstream>

#include "gatecell/checkpoint.hpp"
#include "test_support.hpp"

using namespace gatecell;
using gatecell::testing::read_text;
using gatecell::testing::temp_dir;

TEST_CASE("lstm checkpoint round-trips bit for bit, every variant") {
    const std::string dir = temp_dir("ckpt_lstm");
    for (GateVariant v : kAllVariants) {
        Rng rng(static_cast<std::uint64_t>(v) + 1);
        LstmParams p = init_params(v, 4, 6, rng, v == GateVariant::Vanilla ? 1.0 : 0.0);
        const std::string path = dir + "/" + variant_name(v) + ".bin";
        write_lstm_checkpoint(path, p);
        LstmParams q = read_lstm_checkpoint_file(path);
        CHECK(q.variant == p.variant);
        CHECK(q.m == p.m);
        CHECK(q.n == p.n);
        auto ta = param_tensors(p), tb = param_tensors(q);
        REQUIRE(ta.size() == tb.size());
        for (std::size_t i = 0; i < ta.size(); ++i) {
            CHECK(std::string(ta[i].name) == tb[i].name);
            for (std::size_t k = 0; k < ta[i].size; ++k) CHECK(ta[i].data[k] == tb[i].data[k]);
        }
    }
}

TEST_CASE("checkpoint header layout is the documented little-endian form") {
    const std::string dir = temp_dir("ckpt_header");
    Rng rng(3);
    LstmParams p = init_params(GateVariant::NoInputNoBias, 300, 7, rng);
    const std::string path = dir + "/header.bin";
    write_lstm_checkpoint(path, p);
    const std::string bytes = read_text(path);
    REQUIRE(bytes.size() >= 17);
    CHECK(bytes.compare(0, 5, "GCEL1") == 0);
    auto u32_at = [&](std::size_t off) {
        return std::uint32_t(static_cast<unsigned char>(bytes[off])) |
               (std::uint32_t(static_cast<unsigned char>(bytes[off + 1])) << 8) |
               (std::uint32_t(static_cast<unsigned char>(bytes[off + 2])) << 16) |
               (std::uint32_t(static_cast<unsigned char>(bytes[off + 3])) << 24);
    };
    CHECK(u32_at(5) == 2);    // lstm2 tag
    CHECK(u32_at(9) == 300);  // m
    CHECK(u32_at(13) == 7);   // n
    // payload: present blocks only, 8 bytes per scalar
    CHECK(bytes.size() == 17 + 8 * p.scalar_count());
}

TEST_CASE("checkpoint rejects bad magic and trailing bytes") {
    const std::string dir = temp_dir("ckpt_bad");
    Rng rng(4);
    LstmParams p = init_params(GateVariant::Vanilla, 2, 3, rng);
    const std::string path = dir + "/ok.bin";
    write_lstm_checkpoint(path, p);

    std::string bytes = read_text(path);
    bytes[0] = 'X';
    {
        std::ofstream out(dir + "/bad_magic.bin", std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    CHECK_THROWS_WITH_AS(read_lstm_checkpoint_file(dir + "/bad_magic.bin"), doctest::Contains("magic"),
                         ParseError);

    std::string extra = read_text(path) + "Z";
    {
        std::ofstream out(dir + "/trailing.bin", std::ios::binary);
        out.write(extra.data(), static_cast<std::streamsize>(extra.size()));
    }
    CHECK_THROWS_WITH_AS(read_lstm_checkpoint_file(dir + "/trailing.bin"), doctest::Contains("trailing"),
                         ParseError);
}

TEST_CASE("model checkpoint round-trips with and without an embedding") {
    const std::string dir = temp_dir("ckpt_model");
    Rng rng(5);

    Model with;
    with.lstm = init_params(GateVariant::NoInput, 8, 5, rng);
    with.embedding = init_embedding(11, 8, rng);
    with.head = init_head(3, 5, rng);
    write_model_checkpoint(dir + "/with.bin", with);
    Model with2 = read_model_checkpoint(dir + "/with.bin");
    REQUIRE(with2.embedding.has_value());
    CHECK(with2.embedding->vocab == 11);
    for (std::size_t k = 0; k < with.embedding->table.size(); ++k)
        CHECK(with2.embedding->table.data[k] == with.embedding->table.data[k]);
    for (std::size_t k = 0; k < with.head.w.size(); ++k)
        CHECK(with2.head.w.data[k] == with.head.w.data[k]);

    Model without;
    without.lstm = init_params(GateVariant::BiasOnly, 28, 4, rng);
    without.head = init_head(10, 4, rng);
    write_model_checkpoint(dir + "/without.bin", without);
    Model without2 = read_model_checkpoint(dir + "/without.bin");
    CHECK(!without2.embedding.has_value());
    CHECK(without2.lstm.scalar_count() == without.lstm.scalar_count());
    for (std::size_t k = 0; k < without.head.b.size(); ++k)
        CHECK(without2.head.b[k] == without.head.b[k]);
}
