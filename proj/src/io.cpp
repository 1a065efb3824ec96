#include "tetris/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace tetris::io {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::optional<double> to_double(std::string_view s) {
    const std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = t.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw IngestError("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, mode);
    if (!out) throw IngestError("cannot write " + path.string());
    return out;
}

template <typename U>
void put(std::vector<std::uint8_t>& buf, U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& buf, double v) { put(buf, std::bit_cast<std::uint64_t>(v)); }
void put_f32(std::vector<std::uint8_t>& buf, float v) { put(buf, std::bit_cast<std::uint32_t>(v)); }

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

    template <typename U>
    U get() {
        if (pos_ + sizeof(U) > b_.size()) throw IngestError("TFR1: truncated file");
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(b_[pos_ + i]) << (8 * i));
        pos_ += sizeof(U);
        return v;
    }
    double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
    float f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
    std::size_t remaining() const { return b_.size() - pos_; }

private:
    std::span<const std::uint8_t> b_;
    std::size_t pos_ = 0;
};

constexpr std::size_t tfr_header_bytes = 80;

}  // namespace

RealSignal parse_signal_csv(std::istream& in, std::optional<double> fs, const std::string& source) {
    std::vector<double> t, v;
    std::string line;
    std::size_t lineno = 0, ncols = 0;
    bool first_content = true;
    auto fail = [&](const std::string& msg) {
        throw IngestError(source + ":" + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty()) continue;
        const auto cells = split(s, ',');
        std::vector<double> vals;
        bool numeric = true;
        for (const auto& c : cells) {
            const auto d = to_double(c);
            if (!d) {
                numeric = false;
                break;
            }
            vals.push_back(*d);
        }
        if (first_content) {
            first_content = false;
            if (!numeric) {
                ncols = cells.size();
                continue;
            }
        }
        if (!numeric) fail("non-numeric value");
        if (ncols == 0) ncols = vals.size();
        if (vals.size() != ncols) {
            fail("expected " + std::to_string(ncols) + " columns, found " + std::to_string(vals.size()));
        }
        if (ncols > 2) fail("expected one or two columns");
        for (double d : vals) {
            if (!std::isfinite(d)) fail("non-finite value");
        }
        if (ncols == 2) {
            t.push_back(vals[0]);
            v.push_back(vals[1]);
        } else {
            v.push_back(vals[0]);
        }
    }
    if (v.empty()) throw IngestError(source + ": no samples");
    if (ncols == 1) {
        if (!fs) throw IngestError(source + ": single-column input needs a sample rate");
        return RealSignal(std::move(v), *fs, 0.0);
    }
    if (t.size() < 2) throw IngestError(source + ": need at least two samples to infer the sample rate");
    const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    if (!(dt > 0.0)) throw IngestError(source + ": time column is not increasing");
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double step = t[i] - t[i - 1];
        if (std::abs(step - dt) > 1e-3 * dt) {
            throw IngestError(source + ": non-uniform sampling near t = " + fmt(t[i]));
        }
    }
    const double rate = 1.0 / dt;
    if (fs && std::abs(*fs - rate) > 1e-3 * rate) {
        throw IngestError(source + ": time column implies " + fmt(rate) + " Hz, --fs says " + fmt(*fs));
    }
    return RealSignal(std::move(v), fs.value_or(rate), t.front());
}

RealSignal read_signal_csv(const fs::path& path, std::optional<double> fs) {
    auto in = open_in(path);
    return parse_signal_csv(in, fs, path.string());
}

void write_signal_csv(const fs::path& path, const RealSignal& sig) {
    auto out = open_out(path);
    out << "t,value\n";
    for (std::size_t i = 0; i < sig.size(); ++i) out << fmt(sig.time(i)) << ',' << fmt(sig[i]) << '\n';
    if (!out) throw IngestError("failed writing " + path.string());
}

void Table::add(std::string name, std::vector<double> column) {
    if (!columns.empty() && column.size() != columns.front().size()) {
        throw InvalidArgument("table: column " + name + " has a different length");
    }
    names.push_back(std::move(name));
    columns.push_back(std::move(column));
}

const std::vector<double>& Table::column(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw IngestError("table: no column named " + name);
    return columns[static_cast<std::size_t>(it - names.begin())];
}

void write_table_csv(const fs::path& path, const Table& table) {
    auto out = open_out(path);
    for (std::size_t c = 0; c < table.names.size(); ++c) out << (c ? "," : "") << table.names[c];
    out << '\n';
    const std::size_t rows = table.columns.empty() ? 0 : table.columns.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << fmt(table.columns[c][r]);
        out << '\n';
    }
    if (!out) throw IngestError("failed writing " + path.string());
}

Table read_table_csv(const fs::path& path) {
    auto in = open_in(path);
    Table table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty()) continue;
        const auto cells = split(s, ',');
        if (table.names.empty()) {
            for (const auto& c : cells) table.names.push_back(trim(c));
            table.columns.resize(cells.size());
            continue;
        }
        if (cells.size() != table.names.size()) {
            throw IngestError(path.string() + ":" + std::to_string(lineno) + ": wrong number of columns");
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto d = to_double(cells[c]);
            if (!d) throw IngestError(path.string() + ":" + std::to_string(lineno) + ": non-numeric value");
            table.columns[c].push_back(*d);
        }
    }
    if (table.names.empty()) throw IngestError(path.string() + ": empty table");
    return table;
}

std::vector<std::uint8_t> encode_tfr(const Tfr& tfr, TfrPayload payload) {
    const auto nf = static_cast<std::size_t>(tfr.values.rows());
    const auto nt = static_cast<std::size_t>(tfr.values.cols());
    if (nf != tfr.freq.n || nt != tfr.time.n) throw InvalidArgument("TFR1: matrix does not match its axes");
    std::vector<std::uint8_t> buf;
    buf.reserve(tfr_header_bytes + nf * nt * (payload == TfrPayload::complex ? 8 : 4));
    for (char c : {'T', 'F', 'R', '1'}) buf.push_back(static_cast<std::uint8_t>(c));
    buf.push_back(static_cast<std::uint8_t>(tfr.kind));
    buf.push_back(static_cast<std::uint8_t>(payload));
    put<std::uint16_t>(buf, 0);
    put_f64(buf, tfr.fs);
    put_f64(buf, tfr.window_L);
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(nf));
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(nt));
    put_f64(buf, tfr.freq.f_lo);
    put_f64(buf, nf ? tfr.freq.f_hi() : tfr.freq.f_lo);
    put_f64(buf, tfr.freq.df);
    put_f64(buf, tfr.time.t0);
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(tfr.time.hop));
    put<std::uint32_t>(buf, 0);
    put_f64(buf, tfr.threshold);
    for (std::size_t k = 0; k < nf; ++k) {
        for (std::size_t m = 0; m < nt; ++m) {
            const cplx z = tfr.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m));
            if (payload == TfrPayload::complex) {
                put_f32(buf, static_cast<float>(z.real()));
                put_f32(buf, static_cast<float>(z.imag()));
            } else {
                put_f32(buf, static_cast<float>(std::abs(z)));
            }
        }
    }
    return buf;
}

Tfr decode_tfr(std::span<const std::uint8_t> bytes, TfrPayload* payload_out) {
    if (bytes.size() < tfr_header_bytes || std::memcmp(bytes.data(), "TFR1", 4) != 0) {
        throw IngestError("TFR1: bad magic or short header");
    }
    Reader r(bytes.subspan(4));
    const auto kind = r.get<std::uint8_t>();
    const auto payload = r.get<std::uint8_t>();
    if (kind > 2) throw IngestError("TFR1: unknown kind " + std::to_string(kind));
    if (payload > 1) throw IngestError("TFR1: unknown payload " + std::to_string(payload));
    r.get<std::uint16_t>();
    Tfr tfr;
    tfr.kind = static_cast<TfrKind>(kind);
    tfr.fs = r.f64();
    tfr.window_L = r.f64();
    const std::size_t nf = r.get<std::uint32_t>();
    const std::size_t nt = r.get<std::uint32_t>();
    tfr.freq.f_lo = r.f64();
    r.f64();
    tfr.freq.df = r.f64();
    tfr.freq.n = nf;
    tfr.time.t0 = r.f64();
    tfr.time.hop = r.get<std::uint32_t>();
    r.get<std::uint32_t>();
    tfr.time.fs = tfr.fs;
    tfr.time.n = nt;
    tfr.threshold = r.f64();
    const std::size_t per = payload == 0 ? 8 : 4;
    if (r.remaining() != nf * nt * per) throw IngestError("TFR1: data size does not match the header");
    tfr.values.resize(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(nt));
    for (std::size_t k = 0; k < nf; ++k) {
        for (std::size_t m = 0; m < nt; ++m) {
            const double re = r.f32();
            const double im = payload == 0 ? static_cast<double>(r.f32()) : 0.0;
            tfr.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) = {re, im};
        }
    }
    if (payload_out) *payload_out = static_cast<TfrPayload>(payload);
    return tfr;
}

void write_tfr(const fs::path& path, const Tfr& tfr, TfrPayload payload) {
    const auto bytes = encode_tfr(tfr, payload);
    auto out = open_out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IngestError("failed writing " + path.string());
}

Tfr read_tfr(const fs::path& path, TfrPayload* payload) {
    auto in = open_in(path, std::ios::binary);
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_tfr(bytes, payload);
}

Tfr magnitude_tfr(const Eigen::MatrixXd& mag, const Tfr& like, TfrKind kind) {
    Tfr t = like;
    t.values = mag.cast<cplx>();
    t.kind = kind;
    return t;
}

void write_tfr_csv(const fs::path& path, const Tfr& tfr) {
    auto out = open_out(path);
    out << "freq";
    for (std::size_t m = 0; m < tfr.time.n; ++m) out << ',' << fmt(tfr.time.time(m));
    out << '\n';
    for (std::size_t k = 0; k < tfr.freq.n; ++k) {
        out << fmt(tfr.freq.freq(k));
        for (std::size_t m = 0; m < tfr.time.n; ++m) {
            out << ',' << fmt(std::abs(tfr.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m))));
        }
        out << '\n';
    }
    if (!out) throw IngestError("failed writing " + path.string());
}

TfrCsv read_tfr_csv(const fs::path& path) {
    auto in = open_in(path);
    TfrCsv out;
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty()) continue;
        const auto cells = split(s, ',');
        auto num = [&](const std::string& c) {
            const auto d = to_double(c);
            if (!d) throw IngestError(path.string() + ":" + std::to_string(lineno) + ": non-numeric value");
            return *d;
        };
        if (lineno == 1) {
            for (std::size_t i = 1; i < cells.size(); ++i) out.times.push_back(num(cells[i]));
            continue;
        }
        if (cells.size() != out.times.size() + 1) {
            throw IngestError(path.string() + ":" + std::to_string(lineno) + ": wrong number of columns");
        }
        out.freqs.push_back(num(cells[0]));
        std::vector<double> row;
        for (std::size_t i = 1; i < cells.size(); ++i) row.push_back(num(cells[i]));
        rows.push_back(std::move(row));
    }
    out.magnitude.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(out.times.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        for (std::size_t m = 0; m < rows[k].size(); ++m) {
            out.magnitude(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) = rows[k][m];
        }
    }
    return out;
}

void write_pgm(const fs::path& path, const Eigen::MatrixXd& mag) {
    const double peak = mag.size() ? mag.maxCoeff() : 0.0;
    const double eps = peak > 0.0 ? peak * 1e-8 : 1e-300;
    const Eigen::MatrixXd lg = (mag.array() + eps).log10().matrix();
    const double lo = lg.size() ? lg.minCoeff() : 0.0;
    const double hi = lg.size() ? lg.maxCoeff() : 0.0;
    const double span = hi > lo ? hi - lo : 1.0;
    std::ostringstream os;
    os << "P2\n" << mag.cols() << ' ' << mag.rows() << "\n255\n";
    for (Eigen::Index k = mag.rows() - 1; k >= 0; --k) {
        for (Eigen::Index m = 0; m < mag.cols(); ++m) {
            os << (m ? " " : "") << static_cast<int>(std::lround(255.0 * (lg(k, m) - lo) / span));
        }
        os << '\n';
    }
    write_file_atomic(path, os.str());
    write_file_atomic(fs::path(path.string() + ".json"),
                      "{\"log10_min\": " + fmt(lo) + ", \"log10_max\": " + fmt(hi) + "}\n");
}

namespace {

using Setter = std::function<void(const std::string&)>;

double parse_num(const std::string& key, const std::string& v) {
    const auto d = to_double(v);
    if (!d || !std::isfinite(*d)) throw InvalidArgument("config: " + key + " = '" + v + "' is not a number");
    return *d;
}

long long parse_int(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        throw InvalidArgument("config: " + key + " = '" + v + "' is not an integer");
    }
    return out;
}

std::size_t parse_count(const std::string& key, const std::string& v) {
    const auto i = parse_int(key, v);
    if (i < 0) throw InvalidArgument("config: " + key + " must be >= 0");
    return static_cast<std::size_t>(i);
}

bool parse_bool(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw InvalidArgument("config: " + key + " = '" + v + "' is not a boolean");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    if (trim(v).empty()) return out;
    for (const auto& c : split(v, ',')) out.push_back(parse_num(key, c));
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
    return s;
}

using Schema = std::map<std::string, std::map<std::string, Setter>>;

Schema run_schema(RunConfig& c) {
    auto& p = c.pipeline;
    auto& t = c.pipeline.tetris;
    auto& s = c.pipeline.samd;
    auto num = [](double& dst) { return Setter([&dst](const std::string& v) { dst = parse_num("value", v); }); };
    auto cnt = [](std::size_t& dst) { return Setter([&dst](const std::string& v) { dst = parse_count("value", v); }); };
    auto integer = [](int& dst) {
        return Setter([&dst](const std::string& v) { dst = static_cast<int>(parse_int("value", v)); });
    };
    auto opt = [](std::optional<double>& dst) {
        return Setter([&dst](const std::string& v) { dst = parse_num("value", v); });
    };
    Schema sc;
    sc["tf"] = {{"window_short_L", num(t.window_short_L)}, {"window_long_L", num(t.window_long_L)},
                {"hop", cnt(t.hop)},  {"nfft", cnt(t.nfft)},
                {"f_max", num(t.f_max)}, {"gamma_rel", num(t.gamma_rel)}};
    sc["tetris"] = {
        {"Q", integer(t.Q)},
        {"weights", [&t](const std::string& v) { t.weights = parse_list("tetris.weights", v); }},
        {"p", num(t.p)},
        {"ridge_halfband", num(t.ridge_halfband)},
        {"mode_half_bandwidth", num(t.mode_half_bandwidth)},
        {"smooth_penalty", opt(t.smooth_penalty)},
        {"ref_weight", opt(t.ref_weight)},
        {"confidence_floor", num(t.confidence_floor)},
        {"weak_ridge",
         [&t](const std::string& v) {
             const auto x = trim(v);
             if (x == "abort") t.weak_ridge = WeakRidgePolicy::abort;
             else if (x == "truncate") t.weak_ridge = WeakRidgePolicy::truncate;
             else throw InvalidArgument("config: tetris.weak_ridge must be abort or truncate");
         }},
    };
    sc["samd"] = {{"harmonic_order", integer(s.harmonic_order)}, {"poly_order", integer(s.poly_order)},
                  {"ridge_reg", num(s.ridge_reg)}, {"max_condition", num(s.max_condition)}};
    sc["pipeline"] = {{"fs_target", num(p.fs_target)},
                      {"hp_cutoff", num(p.hp_cutoff)},
                      {"hp_order", integer(p.hp_order)},
                      {"irr_lo", num(p.irr_lo)},
                      {"irr_hi", num(p.irr_hi)},
                      {"baseline_lo", num(p.baseline_lo)},
                      {"baseline_hi", num(p.baseline_hi)},
                      {"irr_ref_halfband", num(p.irr_ref_halfband)},
                      {"resp_half_bandwidth", num(p.resp_half_bandwidth)},
                      {"min_duration", num(p.min_duration)},
                      {"peak_window", num(p.peak_window)},
                      {"peak_std_factor", num(p.peak_std_factor)},
                      {"min_peak_separation", num(p.min_peak_separation)},
                      {"min_irr_strength", num(p.min_irr_strength)}};
    sc["run"] = {
        {"preset", [&c](const std::string& v) { c.preset = trim(v); }},
        {"spec", [&c](const std::string& v) { c.spec = trim(v); }},
        {"input", [&c](const std::string& v) { c.input = trim(v); }},
        {"output", [&c](const std::string& v) { c.output = trim(v); }},
        {"fs", [&c](const std::string& v) { c.fs = parse_num("run.fs", v); }},
        {"export_intermediates", [&c](const std::string& v) { c.export_intermediates = parse_bool("run.export_intermediates", v); }},
        {"seed", [&c](const std::string& v) { c.seed = static_cast<std::uint64_t>(parse_count("run.seed", v)); }},
        {"duration", num(c.duration)},
        {"noise_scale", num(c.noise_scale)},
        {"fm_depth", num(c.fm_depth)},
    };
    return sc;
}

boost::property_tree::ptree read_ini_tree(std::istream& in) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw InvalidArgument("config: line " + std::to_string(e.line()) + ": " + e.message());
    }
    return tree;
}

}  // namespace

void RunConfig::validate() const {
    pipeline.validate();
    if (!spec.empty() && !fs::exists(spec)) throw InvalidArgument("config: spec file " + spec.string() + " not found");
    if (!input.empty() && !fs::exists(input)) throw InvalidArgument("config: input " + input.string() + " not found");
    if (fs && !(*fs > 0.0)) throw InvalidArgument("config: fs must be positive");
    if (!(duration > 0.0)) throw InvalidArgument("config: duration must be positive");
    if (!(noise_scale >= 0.0)) throw InvalidArgument("config: noise_scale must be >= 0");
}

RunConfig parse_run_config(std::istream& in) {
    const auto tree = read_ini_tree(in);
    RunConfig cfg;
    auto schema = run_schema(cfg);
    for (const auto& [section, body] : tree) {
        const auto sit = schema.find(section);
        if (sit == schema.end()) throw InvalidArgument("config: unknown section [" + section + "]");
        if (body.empty() && !body.data().empty()) {
            throw InvalidArgument("config: key '" + section + "' outside a section");
        }
        for (const auto& [key, node] : body) {
            const auto kit = sit->second.find(key);
            if (kit == sit->second.end()) throw InvalidArgument("config: unknown key " + section + "." + key);
            try {
                kit->second(node.data());
            } catch (const InvalidArgument& e) {
                throw InvalidArgument(std::string(e.what()) + " (" + section + "." + key + ")");
            }
        }
    }
    return cfg;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("config: cannot open " + path.string());
    return parse_run_config(in);
}

std::string dump_run_config(const RunConfig& c) {
    const auto& p = c.pipeline;
    const auto& t = p.tetris;
    const auto& s = p.samd;
    std::ostringstream os;
    os << "[tf]\nwindow_short_L = " << fmt(t.window_short_L) << "\nwindow_long_L = " << fmt(t.window_long_L)
       << "\nhop = " << t.hop << "\nnfft = " << t.nfft << "\nf_max = " << fmt(t.f_max)
       << "\ngamma_rel = " << fmt(t.gamma_rel) << "\n\n";
    os << "[tetris]\nQ = " << t.Q << "\nweights = " << join(t.weights) << "\np = " << fmt(t.p)
       << "\nridge_halfband = " << fmt(t.ridge_halfband) << "\nmode_half_bandwidth = " << fmt(t.mode_half_bandwidth);
    if (t.smooth_penalty) os << "\nsmooth_penalty = " << fmt(*t.smooth_penalty);
    if (t.ref_weight) os << "\nref_weight = " << fmt(*t.ref_weight);
    os << "\nconfidence_floor = " << fmt(t.confidence_floor)
       << "\nweak_ridge = " << (t.weak_ridge == WeakRidgePolicy::abort ? "abort" : "truncate") << "\n\n";
    os << "[samd]\nharmonic_order = " << s.harmonic_order << "\npoly_order = " << s.poly_order
       << "\nridge_reg = " << fmt(s.ridge_reg) << "\nmax_condition = " << fmt(s.max_condition) << "\n\n";
    os << "[pipeline]\nfs_target = " << fmt(p.fs_target) << "\nhp_cutoff = " << fmt(p.hp_cutoff)
       << "\nhp_order = " << p.hp_order << "\nirr_lo = " << fmt(p.irr_lo) << "\nirr_hi = " << fmt(p.irr_hi)
       << "\nbaseline_lo = " << fmt(p.baseline_lo) << "\nbaseline_hi = " << fmt(p.baseline_hi)
       << "\nirr_ref_halfband = " << fmt(p.irr_ref_halfband)
       << "\nresp_half_bandwidth = " << fmt(p.resp_half_bandwidth) << "\nmin_duration = " << fmt(p.min_duration)
       << "\npeak_window = " << fmt(p.peak_window) << "\npeak_std_factor = " << fmt(p.peak_std_factor)
       << "\nmin_peak_separation = " << fmt(p.min_peak_separation)
       << "\nmin_irr_strength = " << fmt(p.min_irr_strength) << "\n\n";
    os << "[run]\n";
    if (!c.preset.empty()) os << "preset = " << c.preset << '\n';
    if (!c.spec.empty()) os << "spec = " << c.spec.string() << '\n';
    if (!c.input.empty()) os << "input = " << c.input.string() << '\n';
    if (!c.output.empty()) os << "output = " << c.output.string() << '\n';
    if (c.fs) os << "fs = " << fmt(*c.fs) << '\n';
    os << "export_intermediates = " << (c.export_intermediates ? "true" : "false") << "\nseed = " << c.seed
       << "\nduration = " << fmt(c.duration) << "\nnoise_scale = " << fmt(c.noise_scale)
       << "\nfm_depth = " << fmt(c.fm_depth) << '\n';
    return os.str();
}

GanhmSpec parse_spec_ini(std::istream& in) {
    const auto tree = read_ini_tree(in);
    std::map<std::string, std::string> kv;
    for (const auto& [section, body] : tree) {
        if (section != "ganhm") throw InvalidArgument("spec: unknown section [" + section + "]");
        for (const auto& [key, node] : body) kv[key] = node.data();
    }
    std::map<std::string, bool> used;
    auto take = [&](const std::string& key) -> std::optional<std::string> {
        const auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        used[key] = true;
        return it->second;
    };
    auto need = [&](const std::string& key) {
        auto v = take(key);
        if (!v) throw InvalidArgument("spec: missing key " + key);
        return *v;
    };
    const double fs = parse_num("fs", need("fs"));
    const double t0 = take("t0") ? parse_num("t0", kv["t0"]) : 0.0;
    const int d0 = static_cast<int>(parse_int("d0", need("d0")));
    const int d1 = static_cast<int>(parse_int("d1", need("d1")));
    if (d0 < 0 || d1 < 1) throw InvalidArgument("spec: need d0 >= 0 and d1 >= 1");
    std::optional<std::size_t> n;
    if (auto v = take("n")) n = parse_count("n", *v);

    auto series = [&](const std::string& key, std::size_t len) {
        auto v = parse_list(key, need(key));
        if (v.size() == 1 && len > 1) v.assign(len, v[0]);
        if (v.size() != len) {
            throw InvalidArgument("spec: " + key + " has " + std::to_string(v.size()) + " values, expected " +
                                  std::to_string(len));
        }
        return v;
    };
    auto phase = [&](const std::string& name) {
        auto rate = parse_list(name + "_rate", need(name + "_rate"));
        if (!n) n = rate.size() > 1 ? rate.size() : 0;
        if (*n < 2) throw InvalidArgument("spec: cannot infer the sample count; set n");
        if (rate.size() == 1) rate.assign(*n, rate[0]);
        if (rate.size() != *n) throw InvalidArgument("spec: " + name + "_rate length mismatch");
        if (auto p = take(name)) {
            PhaseFunction f{parse_list(name, *p), std::move(rate), fs, t0};
            if (f.phase.size() != *n) throw InvalidArgument("spec: " + name + " length mismatch");
            return f;
        }
        const double start = take(name + "_start") ? parse_num(name + "_start", kv[name + "_start"]) : 0.0;
        return PhaseFunction::from_derivative(std::move(rate), fs, t0, start);
    };
    const PhaseFunction phi = phase("phi");
    const PhaseFunction phi0 = phase("phi0");
    GanhmSpec spec = GanhmSpec::zeros(d0, d1, phi, phi0);
    const std::size_t len = phi.size();
    for (int l = 0; l <= d1; ++l) {
        if (kv.count("trend_" + std::to_string(l))) spec.trend[static_cast<std::size_t>(l)] = series("trend_" + std::to_string(l), len);
    }
    if (kv.count("riiv_alpha")) spec.riiv_alpha = series("riiv_alpha", static_cast<std::size_t>(d0));
    if (kv.count("riiv_beta")) spec.riiv_beta = series("riiv_beta", static_cast<std::size_t>(d0));
    if (kv.count("riiv_am")) spec.riiv_am = series("riiv_am", len);
    for (int l = 1; l <= d1; ++l) {
        for (int k = 1; k <= d0; ++k) {
            const std::string key = "riav_" + std::to_string(l) + "_" + std::to_string(k);
            if (kv.count(key)) {
                spec.riav_a[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(k - 1)] = series(key, len);
            }
        }
    }
    if (kv.count("riav_beta")) spec.riav_beta = series("riav_beta", static_cast<std::size_t>(d0));
    if (kv.count("cardiac_phases")) spec.cardiac_phases = series("cardiac_phases", static_cast<std::size_t>(d1 + 1));
    if (kv.count("fm_depth")) spec.fm_depth = series("fm_depth", len);
    if (auto v = take("separation")) spec.separation = parse_num("separation", *v);
    for (const auto& [key, value] : kv) {
        if (!used.count(key)) throw InvalidArgument("spec: unknown key " + key);
    }
    spec.validate_structure();
    return spec;
}

GanhmSpec load_spec_ini(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("spec: cannot open " + path.string());
    return parse_spec_ini(in);
}

void write_spec_ini(const fs::path& path, const GanhmSpec& spec) {
    std::ostringstream os;
    os << "[ganhm]\nfs = " << fmt(spec.fs()) << "\nt0 = " << fmt(spec.t0()) << "\nd0 = " << spec.d0
       << "\nd1 = " << spec.d1 << "\nn = " << spec.size() << "\nseparation = " << fmt(spec.separation) << '\n';
    os << "phi = " << join(spec.phi.phase) << "\nphi_rate = " << join(spec.phi.derivative) << '\n';
    os << "phi0 = " << join(spec.phi0.phase) << "\nphi0_rate = " << join(spec.phi0.derivative) << '\n';
    for (std::size_t l = 0; l < spec.trend.size(); ++l) os << "trend_" << l << " = " << join(spec.trend[l]) << '\n';
    if (spec.d0 > 0) {
        os << "riiv_alpha = " << join(spec.riiv_alpha) << "\nriiv_beta = " << join(spec.riiv_beta) << '\n';
        os << "riav_beta = " << join(spec.riav_beta) << '\n';
    }
    os << "riiv_am = " << join(spec.riiv_am) << '\n';
    for (std::size_t l = 0; l < spec.riav_a.size(); ++l) {
        for (std::size_t k = 0; k < spec.riav_a[l].size(); ++k) {
            os << "riav_" << l + 1 << '_' << k + 1 << " = " << join(spec.riav_a[l][k]) << '\n';
        }
    }
    os << "cardiac_phases = " << join(spec.cardiac_phases) << "\nfm_depth = " << join(spec.fm_depth) << '\n';
    write_file_atomic(path, os.str());
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IngestError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw IngestError("failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

fs::path default_output_root() {
    if (const char* env = std::getenv("TETRIS_OUTPUT_ROOT"); env && *env) return env;
    return fs::current_path();
}

}  // namespace tetris::io
