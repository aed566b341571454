#include "vtn/model_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "vtn/errors.hpp"
#include "vtn/fnv.hpp"

namespace vtn {

namespace {

constexpr char kMagic[4] = {'V', 'T', 'N', '1'};

class Writer {
public:
    void i64(std::int64_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const char*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }
    const std::vector<char>& bytes() const { return buf_; }

private:
    std::vector<char> buf_;
};

class Reader {
public:
    Reader(const std::vector<char>& buf, std::size_t end, std::string path) : buf_(buf), end_(end), path_(std::move(path)) {}

    std::int64_t i64() {
        std::int64_t v = 0;
        raw(&v, sizeof v);
        return v;
    }
    double f64() {
        double v = 0.0;
        raw(&v, sizeof v);
        return v;
    }
    void raw(void* p, std::size_t n) {
        if (pos_ + n > end_) throw FormatError(path_ + ": model file ends prematurely");
        std::memcpy(p, buf_.data() + pos_, n);
        pos_ += n;
    }
    std::size_t remaining() const { return end_ - pos_; }

private:
    const std::vector<char>& buf_;
    std::size_t end_;
    std::size_t pos_{0};
    std::string path_;
};

}  // namespace

void save_model(const std::string& path, const VolterraModel& model) {
    const TensorTrain& tt = model.tt();
    Writer w;
    w.raw(kMagic, sizeof kMagic);
    w.i64(model.order());
    w.i64(model.memory());
    w.i64(model.inputs());
    w.i64(model.outputs());
    w.i64(tt.canonical_site() ? static_cast<std::int64_t>(*tt.canonical_site()) : -1);
    w.i64(model.direction() == SweepDirection::left ? 0 : 1);
    w.i64(model.site_fresh() ? 1 : 0);
    for (Index r : tt.ranks()) w.i64(r);
    for (const Core3& c : tt.cores()) {
        for (Index e = 0; e < c.size(); ++e) w.f64(c.entries()(e));
    }
    const std::uint64_t sum = fnv1a64(w.bytes().data(), w.bytes().size());
    w.raw(&sum, sizeof sum);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw FormatError("write failed for '" + path + "'");
}

VolterraModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'");
    const std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < sizeof kMagic || std::memcmp(buf.data(), kMagic, 3) != 0) {
        throw FormatError(path + ": not a VTN model file");
    }
    if (buf[3] != kMagic[3]) {
        throw FormatError(path + ": unsupported model format version 'VTN" + std::string(1, buf[3]) +
                          "' (this build reads VTN1)");
    }
    std::uint64_t stored = 0;
    if (buf.size() < sizeof kMagic + sizeof stored) throw FormatError(path + ": checksum mismatch (truncated file)");
    const std::size_t body = buf.size() - sizeof stored;
    std::memcpy(&stored, buf.data() + body, sizeof stored);
    if (fnv1a64(buf.data(), body) != stored) {
        throw FormatError(path + ": checksum mismatch (file is corrupt or truncated)");
    }

    Reader r(buf, body, path);
    char magic[4];
    r.raw(magic, sizeof magic);
    const std::int64_t order = r.i64();
    const std::int64_t memory = r.i64();
    const std::int64_t inputs = r.i64();
    const std::int64_t outputs = r.i64();
    const std::int64_t site = r.i64();
    const std::int64_t direction = r.i64();
    const std::int64_t fresh = r.i64();
    if (order < 1 || memory < 1 || inputs < 1 || outputs < 1 || site < -1 || site >= order || direction < 0 ||
        direction > 1) {
        throw FormatError(path + ": invalid model header");
    }
    std::vector<Index> ranks(static_cast<std::size_t>(order + 1));
    for (auto& rk : ranks) {
        rk = r.i64();
        if (rk < 1) throw FormatError(path + ": invalid rank chain");
    }
    if (ranks.front() != outputs || ranks.back() != 1) throw FormatError(path + ": rank chain must run from L to 1");
    const Index mode = inputs * memory + 1;
    std::vector<Core3> cores;
    for (std::int64_t k = 0; k < order; ++k) {
        const Index rl = ranks[k];
        const Index rr = ranks[k + 1];
        if (static_cast<std::size_t>(rl * mode * rr) * sizeof(double) > r.remaining()) {
            throw FormatError(path + ": core data shorter than the rank chain requires");
        }
        Eigen::VectorXd entries(rl * mode * rr);
        for (Index e = 0; e < entries.size(); ++e) entries(e) = r.f64();
        cores.emplace_back(rl, mode, rr, std::move(entries));
    }
    if (r.remaining() != 0) throw FormatError(path + ": trailing bytes after core data");
    std::optional<std::size_t> canonical;
    if (site >= 0) canonical = static_cast<std::size_t>(site);
    return VolterraModel(TensorTrain(std::move(cores), canonical), memory, inputs,
                         direction == 0 ? SweepDirection::left : SweepDirection::right, fresh != 0);
}

}  // namespace vtn
