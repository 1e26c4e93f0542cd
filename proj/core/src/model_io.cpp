#include <cstring>
#include <sstream>

#include "fastgcrnn/errors.hpp"
#include "fastgcrnn/io_util.hpp"
#include "fastgcrnn/model.hpp"
#include "fastgcrnn/version.hpp"

namespace fastgcrnn {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_string(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_doubles(std::ostream& out, const double* p, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, &p[i], 8);
        put_u64(out, bits);
    }
}

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;

    void need(std::size_t count) const {
        if (pos + count > buf.size()) throw InputError("checkpoint truncated");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        }
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        }
        pos += 8;
        return v;
    }
    std::string str() {
        const std::uint32_t len = u32();
        need(len);
        std::string s = buf.substr(pos, len);
        pos += len;
        return s;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double d;
        std::memcpy(&d, &bits, 8);
        return d;
    }
};

}  // namespace

void save_checkpoint(const FastGcrnnModel& m, const std::string& path,
                     const std::string& config_echo, const FlowScaler* scaler) {
    if (scaler && scaler->mean.size() != scaler->stdev.size()) {
        throw InputError("save_checkpoint: malformed scaler");
    }
    auto named = m.named_params();
    atomic_write_file(
        path,
        [&](std::ostream& out) {
            out.write(kCheckpointMagic, 8);
            std::ostringstream dims;
            dims << "d_in=" << m.cfg.d_in << "\nd_out=" << m.cfg.d_out
                 << "\nspatial_hidden=" << m.cfg.spatial_hidden
                 << "\nspatial_out=" << m.cfg.spatial_out << "\nhidden=" << m.cfg.hidden
                 << "\nspatial_activation=" << to_string(m.cfg.spatial_activation)
                 << "\ntie_spatial=" << (m.cfg.tie_spatial ? 1 : 0) << "\n";
            put_string(out, dims.str());
            put_string(out, config_echo);
            put_u32(out, static_cast<std::uint32_t>(named.size()));
            for (const auto& [name, p] : named) {
                put_string(out, name);
                put_u64(out, p->value.rows());
                put_u64(out, p->value.cols());
                put_doubles(out, p->value.data(), p->value.size());
            }
            const std::uint32_t scaler_n =
                scaler ? static_cast<std::uint32_t>(scaler->mean.size()) : 0;
            put_u32(out, scaler_n);
            if (scaler) {
                put_doubles(out, scaler->mean.data(), scaler->mean.size());
                put_doubles(out, scaler->stdev.data(), scaler->stdev.size());
            }
        },
        /*binary=*/true);
}

FastGcrnnModel load_checkpoint(const std::string& path, std::string* config_echo,
                               FlowScaler* scaler) {
    const std::string buf = read_file(path);
    if (buf.size() < 8 || std::memcmp(buf.data(), kCheckpointMagic, 8) != 0) {
        throw InputError("not a FGCRNN1 checkpoint: " + path);
    }
    Reader r{buf, 8};
    const std::string dims = r.str();
    const std::string echo = r.str();

    ModelConfig cfg;
    std::istringstream ds(dims);
    std::string line;
    while (std::getline(ds, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "d_in") cfg.d_in = std::stoul(val);
        else if (key == "d_out") cfg.d_out = std::stoul(val);
        else if (key == "spatial_hidden") cfg.spatial_hidden = std::stoul(val);
        else if (key == "spatial_out") cfg.spatial_out = std::stoul(val);
        else if (key == "hidden") cfg.hidden = std::stoul(val);
        else if (key == "spatial_activation") cfg.spatial_activation = activation_from_string(val);
        else if (key == "tie_spatial") cfg.tie_spatial = val == "1";
        else throw InputError("checkpoint has unknown dim key: " + key);
    }

    FastGcrnnModel m(cfg);
    auto named = m.named_params();
    const std::uint32_t n_tensors = r.u32();
    if (n_tensors != named.size()) {
        throw InputError("checkpoint tensor count " + std::to_string(n_tensors) +
                         " does not match model layout (" + std::to_string(named.size()) + ")");
    }
    for (auto& [name, p] : named) {
        const std::string got = r.str();
        if (got != name) {
            throw InputError("checkpoint tensor '" + got + "' does not match expected '" + name +
                             "'");
        }
        const std::uint64_t rows = r.u64();
        const std::uint64_t cols = r.u64();
        if (rows != p->value.rows() || cols != p->value.cols()) {
            throw InputError("checkpoint tensor " + name + " has shape " + std::to_string(rows) +
                             "x" + std::to_string(cols) + ", expected " + p->value.shape_str());
        }
        for (std::size_t i = 0; i < p->value.size(); ++i) p->value.data()[i] = r.f64();
        p->zero_grad();
    }
    if (scaler) {
        scaler->mean.clear();
        scaler->stdev.clear();
    }
    if (r.pos < buf.size()) {
        const std::uint32_t scaler_n = r.u32();
        if (scaler && scaler_n > 0) {
            scaler->mean.resize(scaler_n);
            scaler->stdev.resize(scaler_n);
            for (auto& v : scaler->mean) v = r.f64();
            for (auto& v : scaler->stdev) v = r.f64();
        } else {
            r.pos += static_cast<std::size_t>(scaler_n) * 16;
        }
    }
    if (config_echo) *config_echo = echo;
    return m;
}

}  // namespace fastgcrnn
