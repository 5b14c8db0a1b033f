#include "activelc/io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fmt/format.h>
#include <sstream>

namespace activelc {

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 8> kMagic{'A', 'L', 'C', 'C', 'K', 'P', 'T', '\0'};

class LeWriter {
public:
    explicit LeWriter(std::ostream& os) : os_(os) {}
    void u8(std::uint8_t v) { os_.put(static_cast<char>(v)); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) os_.put(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    std::ostream& os_;
};

class LeReader {
public:
    LeReader(std::istream& is, const fs::path& path) : is_(is), path_(path) {}
    std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }

private:
    std::uint64_t get(int n) {
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) {
            const int c = is_.get();
            if (c == std::char_traits<char>::eof())
                throw IoError(fmt::format("{}: truncated checkpoint", path_.string()));
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
        }
        return v;
    }
    std::istream& is_;
    const fs::path& path_;
};

template <class S, class Fn>
void for_each_field(S& s, Fn&& fn) {
    fn(s.c);
    fn(s.rho);
    for (int a = 0; a < 3; ++a) fn(s.m[a]);
    for (int a = 0; a < 5; ++a) fn(s.Q[a]);
}

void ensure_parent(const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError(fmt::format("{}: cannot create directory: {}", path.parent_path().string(), ec.message()));
    }
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    ensure_parent(path);
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw IoError(fmt::format("{}: cannot open for writing", path.string()));
    return out;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void write_checkpoint(const fs::path& path, const State& state, const Grid& grid, std::uint64_t config_hash,
                      std::uint64_t step) {
    auto out = open_out(path, std::ios::binary);
    out.write(kMagic.data(), kMagic.size());
    LeWriter w(out);
    w.u32(kCheckpointVersion);
    w.u64(config_hash);
    w.u64(step);
    w.i32(grid.dims());
    for (int a = 0; a < 3; ++a) w.i32(grid.cells()[static_cast<std::size_t>(a)]);
    for (int a = 0; a < 3; ++a) w.f64(grid.lengths()[static_cast<std::size_t>(a)]);
    for (int a = 0; a < 3; ++a) w.u8(grid.periodic(a) ? 1 : 0);
    w.f64(state.t);
    w.u64(state.c.size());
    for_each_field(state, [&](const ScalarField& f) {
        for (double v : f.raw()) w.f64(v);
    });
    out.flush();
    if (!out) throw IoError(fmt::format("{}: write failed", path.string()));
}

RestoredCheckpoint read_checkpoint(const fs::path& path, const Grid& grid, std::optional<std::uint64_t> expected_hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("{}: cannot open checkpoint", path.string()));
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw VersionError(fmt::format("{}: not an activelc checkpoint", path.string()));
    LeReader r(in, path);
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw VersionError(fmt::format("{}: checkpoint format version {} (expected {})", path.string(), version,
                                       kCheckpointVersion));
    RestoredCheckpoint rc;
    rc.config_hash = r.u64();
    if (expected_hash && *expected_hash != rc.config_hash)
        throw VersionError(fmt::format("{}: config hash {:016x} does not match the current config {:016x}",
                                       path.string(), rc.config_hash, *expected_hash));
    rc.step = r.u64();
    bool same = r.i32() == grid.dims();
    for (int a = 0; a < 3; ++a) same = (r.i32() == grid.cells()[static_cast<std::size_t>(a)]) && same;
    for (int a = 0; a < 3; ++a) same = (r.f64() == grid.lengths()[static_cast<std::size_t>(a)]) && same;
    for (int a = 0; a < 3; ++a) same = ((r.u8() != 0) == grid.periodic(a)) && same;
    if (!same) throw VersionError(fmt::format("{}: checkpoint grid differs from the configured grid", path.string()));
    rc.state = State(grid.layout());
    rc.state.t = r.f64();
    if (r.u64() != rc.state.c.size())
        throw VersionError(fmt::format("{}: checkpoint array size differs from the grid layout", path.string()));
    for_each_field(rc.state, [&](ScalarField& f) {
        for (double& v : f.raw()) v = r.f64();
    });
    return rc;
}

void write_vtk(const fs::path& path, std::string_view name, const ScalarField& f, const Grid& grid) {
    auto out = open_out(path);
    const auto& n = grid.cells();
    fmt::memory_buffer buf;
    fmt::format_to(std::back_inserter(buf),
                   "# vtk DataFile Version 3.0\n{}\nASCII\nDATASET STRUCTURED_POINTS\n"
                   "DIMENSIONS {} {} {}\nORIGIN {:.17g} {:.17g} {:.17g}\nSPACING {:.17g} {:.17g} {:.17g}\n"
                   "POINT_DATA {}\nSCALARS {} double 1\nLOOKUP_TABLE default\n",
                   name, n[0], n[1], n[2], grid.center(0, 0), grid.center(1, 0), grid.center(2, 0), grid.h(0),
                   grid.h(1), grid.h(2), grid.cell_count(), name);
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i) fmt::format_to(std::back_inserter(buf), "{:.17g}\n", f(i, j, k));
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError(fmt::format("{}: write failed", path.string()));
}

std::vector<fs::path> write_snapshot(const fs::path& dir, std::uint64_t step, const State& s, const Grid& grid,
                                     double vacuum_floor) {
    const VectorField u = velocity(s, grid, vacuum_floor);
    std::vector<fs::path> paths;
    auto emit = [&](std::string_view name, const ScalarField& f) {
        paths.push_back(dir / fmt::format("{}_{:06d}.vtk", name, step));
        write_vtk(paths.back(), name, f, grid);
    };
    emit("c", s.c);
    emit("rho", s.rho);
    emit("u_x", u[0]);
    emit("u_y", u[1]);
    emit("u_z", u[2]);
    static constexpr std::array<std::string_view, 5> qnames{"Q11", "Q22", "Q12", "Q13", "Q23"};
    for (int a = 0; a < 5; ++a) emit(qnames[static_cast<std::size_t>(a)], s.Q[a]);
    return paths;
}

std::string format_series_row(const SeriesRow& r) {
    const auto& e = r.energy;
    const auto& m = r.monitors;
    const auto& sr = r.step_report;
    return fmt::format(
        "{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},"
        "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},"
        "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{},{},{}",
        r.step, e.t, r.dt, e.E, e.energy.concentration, e.energy.kinetic, e.energy.pressure, e.energy.artificial,
        e.energy.q_bulk, e.energy.q_elastic, e.diss_c, e.diss_u, e.diss_div, e.diss_q, e.diss_q6, e.rhs_bound,
        m.c_min, m.c_max, m.c_violation, m.mass, m.mass_drift, m.rho_min, m.envelope, r.div_integral,
        m.trace_drift, m.rho_gamma_theta, m.q_L10, m.grad_q_L10_3, m.delta_rho_beta, r.identities.lemmaA1,
        r.identities.pointwise_skew, sr.cg_concentration, sr.cg_q, sr.cg_density, sr.cg_momentum);
}

SeriesWriter::SeriesWriter(const fs::path& path) : path_(path), out_(open_out(path)) {
    out_ << kSeriesHeader << '\n';
}

void SeriesWriter::write(const SeriesRow& row) {
    out_ << format_series_row(row) << '\n';
    if (!out_) throw IoError(fmt::format("{}: write failed", path_.string()));
}

void SeriesWriter::flush() { out_.flush(); }

void write_text(const fs::path& path, std::string_view text) {
    auto out = open_out(path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError(fmt::format("{}: write failed", path.string()));
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("{}: cannot open", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace activelc
