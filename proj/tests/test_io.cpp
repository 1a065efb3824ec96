#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "tetris/io.hpp"

using namespace tetris;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("tetris_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path dir_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Tfr random_tfr(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Tfr t;
    t.freq = {0.05, 0.0125, 17};
    t.time = TimeAxis::frames(200, 50.0, 1.5, 5);
    t.values.resize(17, static_cast<Eigen::Index>(t.time.n));
    for (Eigen::Index i = 0; i < t.values.size(); ++i) t.values.data()[i] = {g(rng), g(rng)};
    t.window_L = 60.0;
    t.fs = 50.0;
    t.kind = TfrKind::sst;
    t.threshold = 3.25e-4;
    return t;
}

}  // namespace

using Io = TempDir;

TEST_F(Io, SignalCsvRoundTrip) {
    const RealSignal sig(oracle::tone(1.3, 500, 50.0, 2.5, 0.4), 50.0, 3.0);
    const auto path = dir_ / "x.csv";
    io::write_signal_csv(path, sig);
    const auto back = io::read_signal_csv(path);
    ASSERT_EQ(back.size(), sig.size());
    EXPECT_NEAR(back.fs(), 50.0, 1e-9);
    EXPECT_NEAR(back.t0(), 3.0, 1e-9);
    for (std::size_t i = 0; i < sig.size(); ++i) EXPECT_NEAR(back[i], sig[i], 1e-9);
}

TEST(IoCsv, SingleColumnNeedsRate) {
    std::istringstream a("value\n1\n2\n3\n");
    EXPECT_THROW(io::parse_signal_csv(a), IngestError);
    std::istringstream b("1\n2\n3\n");
    const auto s = io::parse_signal_csv(b, 10.0);
    EXPECT_EQ(s.size(), 3u);
    EXPECT_DOUBLE_EQ(s.fs(), 10.0);
}

TEST(IoCsv, ErrorsNameTheLine) {
    std::istringstream bad("t,x\n0,1\n0.1,oops\n");
    try {
        io::parse_signal_csv(bad, {}, "in.csv");
        FAIL() << "expected IngestError";
    } catch (const IngestError& e) {
        EXPECT_NE(std::string(e.what()).find("in.csv:3"), std::string::npos) << e.what();
    }
    std::istringstream gaps("0,1\n0.1,2\n0.3,3\n");
    EXPECT_THROW(io::parse_signal_csv(gaps), IngestError);
    std::istringstream ragged("0,1\n0.1,2,3\n");
    EXPECT_THROW(io::parse_signal_csv(ragged), IngestError);
    std::istringstream mismatch("0,1\n0.1,2\n0.2,3\n");
    EXPECT_THROW(io::parse_signal_csv(mismatch, 50.0), IngestError);
}

TEST_F(Io, TableRoundTrip) {
    io::Table t;
    t.add("t", {0.0, 0.02, 0.04});
    t.add("irr", {0.25, 0.2500000000000001, 0.26});
    const auto path = dir_ / "table.csv";
    io::write_table_csv(path, t);
    const auto back = io::read_table_csv(path);
    ASSERT_EQ(back.names, t.names);
    EXPECT_EQ(back.column("irr"), t.column("irr"));
    EXPECT_THROW(t.add("short", {1.0}), InvalidArgument);
}

TEST_F(Io, TfrBinaryReencodesBitExact) {
    const auto tfr = random_tfr(3);
    for (auto payload : {io::TfrPayload::complex, io::TfrPayload::magnitude}) {
        const auto bytes = io::encode_tfr(tfr, payload);
        ASSERT_EQ(bytes.size(), 80u + 4u * 17u * 40u * (payload == io::TfrPayload::complex ? 2u : 1u));
        EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "TFR1");
        io::TfrPayload seen{};
        const auto back = io::decode_tfr(bytes, &seen);
        EXPECT_EQ(seen, payload);
        EXPECT_EQ(io::encode_tfr(back, payload), bytes);
        EXPECT_EQ(back.kind, TfrKind::sst);
        EXPECT_EQ(back.time.hop, 5u);
        EXPECT_DOUBLE_EQ(back.time.t0, 1.5);
        EXPECT_DOUBLE_EQ(back.freq.df, 0.0125);
        EXPECT_DOUBLE_EQ(back.threshold, 3.25e-4);
        const double err = payload == io::TfrPayload::complex
                               ? (back.values - tfr.values).cwiseAbs().maxCoeff()
                               : (back.magnitude() - tfr.magnitude()).cwiseAbs().maxCoeff();
        EXPECT_LE(err, 1e-6 * tfr.magnitude().maxCoeff());
    }
    const auto path = dir_ / "v.tfr";
    io::write_tfr(path, tfr, io::TfrPayload::complex);
    EXPECT_EQ(io::encode_tfr(io::read_tfr(path), io::TfrPayload::complex),
              io::encode_tfr(tfr, io::TfrPayload::complex));
}

TEST(IoTfr, RejectsCorruptHeaders) {
    auto bytes = io::encode_tfr(random_tfr(4), io::TfrPayload::magnitude);
    auto truncated = bytes;
    truncated.resize(truncated.size() - 4);
    EXPECT_THROW(io::decode_tfr(truncated), IngestError);
    auto magic = bytes;
    magic[0] = 'X';
    EXPECT_THROW(io::decode_tfr(magic), IngestError);
    EXPECT_THROW(io::decode_tfr(std::span<const std::uint8_t>(bytes.data(), 20)), IngestError);
}

TEST_F(Io, TfrCsvAndPgm) {
    const auto tfr = random_tfr(5);
    const auto csv = dir_ / "m.csv";
    io::write_tfr_csv(csv, tfr);
    const auto back = io::read_tfr_csv(csv);
    ASSERT_EQ(back.freqs.size(), tfr.freq.n);
    ASSERT_EQ(back.times.size(), tfr.time.n);
    EXPECT_LE((back.magnitude - tfr.magnitude()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(back.times[1], tfr.time.time(1), 1e-12);

    const auto pgm = dir_ / "m.pgm";
    io::write_pgm(pgm, tfr.magnitude());
    std::istringstream in(slurp(pgm));
    std::string magic;
    int w = 0, h = 0, maxv = 0;
    in >> magic >> w >> h >> maxv;
    EXPECT_EQ(magic, "P2");
    EXPECT_EQ(w, 40);
    EXPECT_EQ(h, 17);
    EXPECT_EQ(maxv, 255);
    int v = 0, count = 0, top = 0;
    while (in >> v) {
        ++count;
        top = std::max(top, v);
        EXPECT_GE(v, 0);
        EXPECT_LE(v, 255);
    }
    EXPECT_EQ(count, w * h);
    EXPECT_EQ(top, 255);
    EXPECT_NE(slurp(fs::path(pgm.string() + ".json")).find("log10_max"), std::string::npos);
}

TEST(IoConfig, DumpParsesBackIdentically) {
    io::RunConfig c;
    c.preset = "semireal-b";
    c.fs = 125.0;
    c.seed = 42;
    c.pipeline.tetris.Q = 2;
    c.pipeline.tetris.weights = {1.0, 0.5, 0.25};
    c.pipeline.tetris.smooth_penalty = 0.125;
    c.pipeline.tetris.weak_ridge = WeakRidgePolicy::truncate;
    c.pipeline.samd.harmonic_order = 3;
    c.pipeline.irr_hi = 0.45;
    const auto text = io::dump_run_config(c);
    std::istringstream in(text);
    const auto back = io::parse_run_config(in);
    EXPECT_EQ(io::dump_run_config(back), text);
    EXPECT_EQ(back.pipeline.tetris.weak_ridge, WeakRidgePolicy::truncate);
    ASSERT_TRUE(back.fs.has_value());
    EXPECT_DOUBLE_EQ(*back.fs, 125.0);
}

TEST(IoConfig, RejectsUnknownKeysAndBadValues) {
    for (const char* text : {"[tf]\nwindow_shrt_L = 10\n", "[extra]\na = 1\n", "[tetris]\nQ = two\n",
                             "[tetris]\nweak_ridge = maybe\n"}) {
        std::istringstream in(text);
        EXPECT_THROW(io::parse_run_config(in), InvalidArgument) << text;
    }
    // Parsable but out of range: caught by validate().
    std::istringstream range("[samd]\npoly_order = -1\n");
    const auto cfg = io::parse_run_config(range);
    EXPECT_THROW(cfg.validate(), InvalidArgument);
    std::istringstream ok("[tf]\nwindow_long_L = 40\n");
    EXPECT_DOUBLE_EQ(io::parse_run_config(ok).pipeline.tetris.window_long_L, 40.0);
}

TEST_F(Io, SpecIniRoundTrip) {
    const auto preset = make_preset("semireal-b");
    const auto path = dir_ / "b.ini";
    io::write_spec_ini(path, preset.spec);
    const auto back = io::load_spec_ini(path);
    const auto a = synthesize_ganhm(preset.spec, preset.spec.size());
    const auto b = synthesize_ganhm(back, back.size());
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);

    std::istringstream minimal("[ganhm]\nfs = 50\nn = 3000\nd0 = 1\nd1 = 1\nphi_rate = 1.2\nphi0_rate = 0.25\n"
                               "riiv_am = 1\nriav_1_1 = 0.1\n");
    const auto m = io::parse_spec_ini(minimal);
    EXPECT_EQ(m.size(), 3000u);
    EXPECT_DOUBLE_EQ(m.riav_a[0][0][2999], 0.1);

    std::istringstream unknown("[ganhm]\nfs = 50\nn = 10\nd0 = 1\nd1 = 1\nphi_rate = 1.2\nphi0_rate = 0.25\nbogus = 1\n");
    EXPECT_THROW(io::parse_spec_ini(unknown), InvalidArgument);
}

TEST_F(Io, AtomicWriteLeavesNoTemporary) {
    const auto path = dir_ / "sub" / "out.txt";
    io::write_file_atomic(path, "first");
    io::write_file_atomic(path, "second");
    EXPECT_EQ(slurp(path), "second");
    EXPECT_FALSE(fs::exists(path.string() + ".tmp"));
}
