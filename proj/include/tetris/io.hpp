#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tetris/pipeline.hpp"
#include "tetris/signal.hpp"
#include "tetris/signal_model.hpp"
#include "tetris/tf.hpp"

namespace tetris::io {

namespace fs = std::filesystem;

/// Two columns (t, value) or one column with `fs` given. A non-numeric first
/// line is taken as a header. Errors carry the 1-based line number.
RealSignal parse_signal_csv(std::istream& in, std::optional<double> fs = {}, const std::string& source = "<input>");
RealSignal read_signal_csv(const fs::path& path, std::optional<double> fs = {});
void write_signal_csv(const fs::path& path, const RealSignal& sig);

struct Table {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    void add(std::string name, std::vector<double> column);
    const std::vector<double>& column(const std::string& name) const;
};

void write_table_csv(const fs::path& path, const Table& table);
Table read_table_csv(const fs::path& path);

enum class TfrPayload : std::uint8_t { complex = 0, magnitude = 1 };

/// TFR1 binary layout, all little-endian:
///   0  char[4] "TFR1"      4  u8 kind      5  u8 payload   6  u16 reserved
///   8  f64 fs             16  f64 window L
///  24  u32 n_freq         28  u32 n_time
///  32  f64 f_lo           40  f64 f_hi     48  f64 df
///  56  f64 t0             64  u32 hop      68  u32 reserved
///  72  f64 threshold
///  80  f32 data, frequency-major; (re, im) pairs or magnitudes
std::vector<std::uint8_t> encode_tfr(const Tfr& tfr, TfrPayload payload);
Tfr decode_tfr(std::span<const std::uint8_t> bytes, TfrPayload* payload = nullptr);
void write_tfr(const fs::path& path, const Tfr& tfr, TfrPayload payload);
Tfr read_tfr(const fs::path& path, TfrPayload* payload = nullptr);

/// Magnitude matrix stored in a Tfr shell with the axes of `like`.
Tfr magnitude_tfr(const Eigen::MatrixXd& mag, const Tfr& like, TfrKind kind);

struct TfrCsv {
    std::vector<double> freqs;
    std::vector<double> times;
    Eigen::MatrixXd magnitude;
};

/// Magnitudes with a header row of frame times and a leading frequency column.
void write_tfr_csv(const fs::path& path, const Tfr& tfr);
TfrCsv read_tfr_csv(const fs::path& path);

/// Plain (P2) log10 heatmap, highest frequency on the first row, with a
/// `<path>.json` sidecar holding the log10 range.
void write_pgm(const fs::path& path, const Eigen::MatrixXd& mag);

struct RunConfig {
    PipelineConfig pipeline;  // pipeline.tetris drives the tetris subcommand too
    std::string preset;
    fs::path spec;
    fs::path input;
    fs::path output;
    std::optional<double> fs;
    bool export_intermediates = false;
    std::uint64_t seed = 1;
    double duration = 120.0;
    double noise_scale = 1.0;
    double fm_depth = -1.0;

    void validate() const;
};

/// INI with sections [tf], [tetris], [samd], [pipeline], [run]. Unknown
/// sections or keys and unparsable values raise InvalidArgument.
RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const fs::path& path);
std::string dump_run_config(const RunConfig& cfg);

/// [ganhm] section; series are comma lists, length-1 lists broadcast to n.
GanhmSpec parse_spec_ini(std::istream& in);
GanhmSpec load_spec_ini(const fs::path& path);
void write_spec_ini(const fs::path& path, const GanhmSpec& spec);

/// Write to a sibling temporary file and rename over `path`.
void write_file_atomic(const fs::path& path, const std::string& content);

/// $TETRIS_OUTPUT_ROOT when set, otherwise the working directory.
fs::path default_output_root();

}  // namespace tetris::io
