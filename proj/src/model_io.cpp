#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "vitals/errors.hpp"
#include "vitals/model.hpp"

namespace vitals {

namespace {

constexpr char kMagic[4] = {'M', 'T', 'V', 'L'};
constexpr std::uint32_t kVersion = 1;

enum LayerKindId : std::uint32_t {
    kConv = 0,
    kRelu = 1,
    kMaxPool = 2,
    kBatchNorm = 3,
    kDense = 4,
    kGap = 5,
    kResidual = 6,
};

struct Writer {
    std::vector<std::uint8_t> buf;

    void u8(std::uint8_t v) { buf.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    void f64s(const std::vector<double>& vs) {
        for (double v : vs) f64(v);
    }
};

struct Reader {
    const std::vector<std::uint8_t>& buf;
    std::size_t pos = 0;

    void need(std::size_t n, const char* what) const {
        if (pos + n > buf.size()) {
            throw FormatError(std::string("model file truncated while reading ") + what, pos);
        }
    }
    std::uint8_t u8(const char* what) {
        need(1, what);
        return buf[pos++];
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    double f64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[pos + i]) << (8 * i);
        pos += 8;
        return std::bit_cast<double>(v);
    }
    void f64s(std::vector<double>& out, const char* what) {
        for (double& v : out) v = f64(what);
    }
};

void write_conv_spec(Writer& w, const nn::Conv1d& c) {
    w.u32(static_cast<std::uint32_t>(c.in_channels));
    w.u32(static_cast<std::uint32_t>(c.out_channels));
    w.u32(static_cast<std::uint32_t>(c.kernel));
    w.u32(static_cast<std::uint32_t>(c.stride));
    w.u32(c.padding == nn::Padding::Same ? 0 : 1);
}

nn::Conv1d read_conv_spec(Reader& r) {
    nn::Conv1d c;
    c.in_channels = static_cast<int>(r.u32("conv in_channels"));
    c.out_channels = static_cast<int>(r.u32("conv out_channels"));
    c.kernel = static_cast<int>(r.u32("conv kernel"));
    c.stride = static_cast<int>(r.u32("conv stride"));
    std::size_t pad_off = r.pos;
    std::uint32_t pad = r.u32("conv padding");
    if (pad > 1) throw FormatError("bad conv padding code", pad_off);
    c.padding = pad == 0 ? nn::Padding::Same : nn::Padding::Valid;
    if (c.in_channels < 1 || c.out_channels < 1 || c.kernel < 1 || c.stride < 1 ||
        c.in_channels > 4096 || c.out_channels > 4096 || c.kernel > 4096) {
        throw FormatError("conv shape out of range", pad_off);
    }
    c.w.resize(static_cast<std::size_t>(c.out_channels) * c.in_channels * c.kernel);
    c.b.resize(static_cast<std::size_t>(c.out_channels));
    return c;
}

}  // namespace

void save_model(const Model& model, const std::string& path) {
    model.validate_shapes();
    Writer w;
    w.buf.insert(w.buf.end(), kMagic, kMagic + 4);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(model.arch));
    w.u32(static_cast<std::uint32_t>(model.task));
    w.u32(static_cast<std::uint32_t>(model.input_len));
    w.u8(model.band ? 1 : 0);
    if (model.band) {
        w.f64(model.band->low_hz);
        w.f64(model.band->high_hz);
        w.u8(model.band->keep_dc ? 1 : 0);
        w.u32(static_cast<std::uint32_t>(model.band->k_lo));
        w.u32(static_cast<std::uint32_t>(model.band->k_hi));
    }
    w.u32(static_cast<std::uint32_t>(model.layers.size()));
    for (const nn::Layer& l : model.layers) {
        if (const auto* c = std::get_if<nn::Conv1d>(&l)) {
            w.u32(kConv);
            write_conv_spec(w, *c);
        } else if (std::get_if<nn::Relu>(&l)) {
            w.u32(kRelu);
        } else if (const auto* mp = std::get_if<nn::MaxPool>(&l)) {
            w.u32(kMaxPool);
            w.u32(static_cast<std::uint32_t>(mp->width));
            w.u32(static_cast<std::uint32_t>(mp->stride));
        } else if (const auto* bn = std::get_if<nn::BatchNorm>(&l)) {
            w.u32(kBatchNorm);
            w.u32(static_cast<std::uint32_t>(bn->channels));
            w.f64(bn->eps);
            w.f64(bn->momentum);
        } else if (const auto* d = std::get_if<nn::Dense>(&l)) {
            w.u32(kDense);
            w.u32(static_cast<std::uint32_t>(d->in_features));
            w.u32(static_cast<std::uint32_t>(d->out_features));
        } else if (std::get_if<nn::Gap>(&l)) {
            w.u32(kGap);
        } else if (const auto* r = std::get_if<nn::ResidualBlock>(&l)) {
            w.u32(kResidual);
            write_conv_spec(w, r->conv1);
            write_conv_spec(w, r->conv2);
        }
    }
    w.f64s(nn::param_vector(model.layers));
    w.f64s(nn::state_vector(model.layers));

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DatasetError("cannot open model file for writing: " + path);
    out.write(reinterpret_cast<const char*>(w.buf.data()),
              static_cast<std::streamsize>(w.buf.size()));
    if (!out) throw DatasetError("failed writing model file: " + path);
}

Model load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("cannot open model file: " + path);
    std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
    Reader r{buf};

    r.need(4, "magic");
    if (std::memcmp(buf.data(), kMagic, 4) != 0) {
        throw FormatError("bad magic (expected \"MTVL\")", 0);
    }
    r.pos = 4;
    std::size_t ver_off = r.pos;
    std::uint32_t version = r.u32("version");
    if (version != kVersion) {
        throw FormatError("unsupported model version " + std::to_string(version), ver_off);
    }

    Model m;
    std::size_t arch_off = r.pos;
    std::uint32_t arch = r.u32("architecture id");
    if (arch > 3) throw FormatError("unknown architecture id", arch_off);
    m.arch = static_cast<ArchitectureId>(arch);
    std::size_t task_off = r.pos;
    std::uint32_t task = r.u32("task id");
    if (task > 1) throw FormatError("unknown task id", task_off);
    m.task = static_cast<TaskId>(task);
    m.input_len = static_cast<int>(r.u32("input length"));

    if (r.u8("band flag") != 0) {
        BandMask band;
        band.low_hz = r.f64("band low_hz");
        band.high_hz = r.f64("band high_hz");
        band.keep_dc = r.u8("band keep_dc") != 0;
        band.k_lo = static_cast<int>(r.u32("band k_lo"));
        band.k_hi = static_cast<int>(r.u32("band k_hi"));
        m.band = band;
    }

    std::uint32_t layer_count = r.u32("layer count");
    if (layer_count > 4096) throw FormatError("implausible layer count", r.pos - 4);
    for (std::uint32_t i = 0; i < layer_count; ++i) {
        std::size_t kind_off = r.pos;
        std::uint32_t kind = r.u32("layer kind");
        switch (kind) {
            case kConv: m.layers.emplace_back(read_conv_spec(r)); break;
            case kRelu: m.layers.emplace_back(nn::Relu{}); break;
            case kMaxPool: {
                nn::MaxPool mp;
                mp.width = static_cast<int>(r.u32("maxpool width"));
                mp.stride = static_cast<int>(r.u32("maxpool stride"));
                m.layers.emplace_back(mp);
                break;
            }
            case kBatchNorm: {
                nn::BatchNorm bn;
                bn.channels = static_cast<int>(r.u32("batchnorm channels"));
                if (bn.channels < 1 || bn.channels > 4096) {
                    throw FormatError("batchnorm channels out of range", kind_off);
                }
                bn.eps = r.f64("batchnorm eps");
                bn.momentum = r.f64("batchnorm momentum");
                bn.gamma.resize(static_cast<std::size_t>(bn.channels));
                bn.beta.resize(static_cast<std::size_t>(bn.channels));
                bn.run_mean.resize(static_cast<std::size_t>(bn.channels));
                bn.run_var.resize(static_cast<std::size_t>(bn.channels));
                m.layers.emplace_back(bn);
                break;
            }
            case kDense: {
                nn::Dense d;
                d.in_features = static_cast<int>(r.u32("dense in_features"));
                d.out_features = static_cast<int>(r.u32("dense out_features"));
                if (d.in_features < 1 || d.out_features < 1 || d.in_features > (1 << 20) ||
                    d.out_features > (1 << 20)) {
                    throw FormatError("dense shape out of range", kind_off);
                }
                d.w.resize(static_cast<std::size_t>(d.out_features) * d.in_features);
                d.b.resize(static_cast<std::size_t>(d.out_features));
                m.layers.emplace_back(d);
                break;
            }
            case kGap: m.layers.emplace_back(nn::Gap{}); break;
            case kResidual: {
                nn::ResidualBlock rb;
                rb.conv1 = read_conv_spec(r);
                rb.conv2 = read_conv_spec(r);
                m.layers.emplace_back(rb);
                break;
            }
            default: throw FormatError("unknown layer kind " + std::to_string(kind), kind_off);
        }
    }

    std::vector<double> params(nn::param_count(m.layers));
    r.f64s(params, "parameters");
    nn::set_param_vector(m.layers, params);
    std::vector<double> state(nn::state_vector(m.layers).size());
    r.f64s(state, "running statistics");
    nn::set_state_vector(m.layers, state);

    if (r.pos != buf.size()) {
        throw FormatError("trailing bytes after model payload", r.pos);
    }
    try {
        m.validate_shapes();
    } catch (const ShapeError& e) {
        throw FormatError(std::string("invalid shape chain: ") + e.what(), r.pos);
    }
    return m;
}

}  // namespace vitals
