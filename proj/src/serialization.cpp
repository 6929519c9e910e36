#include "hdsurr/serialization.hpp"

#include "hdsurr/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"

namespace hdsurr {

namespace {

constexpr char kMagic[8] = {'H', 'D', 'S', 'U', 'R', 'R', '0', '1'};
constexpr std::uint32_t kKindFtt = 1;
constexpr std::uint32_t kKindKernel = 2;
constexpr std::uint32_t kKindMlp = 3;

static_assert(std::endian::native == std::endian::little, "binary format assumes little-endian hosts");

template <class T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw ArgumentError("ftt record truncated");
    return v;
}

FunctionalTT assemble(const std::vector<int>& sizes, const std::vector<int>& ranks,
                      const std::vector<Interval>& domains,
                      const std::vector<std::vector<double>>& entries) {
    const std::size_t d = sizes.size();
    if (d == 0 || ranks.size() != d + 1 || domains.size() != d || entries.size() != d)
        throw ArgumentError("ftt record: inconsistent field sizes");
    std::vector<TTCore> cores;
    std::vector<BasisSpec> bases;
    for (std::size_t k = 0; k < d; ++k) {
        TTCore c(ranks[k], sizes[k], ranks[k + 1]);
        if (entries[k].size() != c.size()) throw ArgumentError("ftt record: core size mismatch");
        c.data() = entries[k];
        cores.push_back(std::move(c));
        bases.emplace_back(sizes[k], domains[k]);
    }
    return FunctionalTT(TensorTrain(std::move(cores)), std::move(bases));
}

void check_magic(std::istream& in, std::uint32_t kind, const char* what) {
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw ArgumentError(std::string(what) + " record: bad magic");
    if (get<std::uint32_t>(in) != kind) throw ArgumentError(std::string(what) + " record: wrong kind");
}

template <class T>
T open_and(const std::string& path, T (*reader)(std::istream&)) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("cannot open " + path);
    return reader(in);
}

}  // namespace

void write_ftt_binary(std::ostream& out, const FunctionalTT& s) {
    const TensorTrain& t = s.train();
    const int d = t.dim();
    out.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kKindFtt);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(d));
    for (int k = 0; k < d; ++k) put<std::uint64_t>(out, t.core(k).n());
    put<std::uint64_t>(out, 1);
    for (int k = 0; k < d; ++k) put<std::uint64_t>(out, t.core(k).r_right());
    for (int k = 0; k < d; ++k) {
        put<double>(out, s.bases()[k].domain().lo);
        put<double>(out, s.bases()[k].domain().hi);
    }
    for (int k = 0; k < d; ++k)
        out.write(reinterpret_cast<const char*>(t.core(k).data().data()),
                  static_cast<std::streamsize>(sizeof(double) * t.core(k).size()));
    if (!out) throw ArgumentError("ftt record: write failed");
}

FunctionalTT read_ftt_binary(std::istream& in) {
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw ArgumentError("ftt record: bad magic");
    if (get<std::uint32_t>(in) != kKindFtt) throw ArgumentError("ftt record: not a functional TT");
    const auto d = get<std::uint64_t>(in);
    if (d == 0 || d > 100000) throw ArgumentError("ftt record: implausible dimension");
    std::vector<int> sizes(d), ranks(d + 1);
    for (auto& n : sizes) n = static_cast<int>(get<std::uint64_t>(in));
    for (auto& r : ranks) r = static_cast<int>(get<std::uint64_t>(in));
    std::vector<Interval> domains(d);
    for (auto& iv : domains) {
        iv.lo = get<double>(in);
        iv.hi = get<double>(in);
    }
    std::vector<std::vector<double>> entries(d);
    for (std::size_t k = 0; k < d; ++k) {
        entries[k].resize(std::size_t(ranks[k]) * sizes[k] * ranks[k + 1]);
        if (!in.read(reinterpret_cast<char*>(entries[k].data()),
                     static_cast<std::streamsize>(sizeof(double) * entries[k].size())))
            throw ArgumentError("ftt record truncated");
    }
    return assemble(sizes, ranks, domains, entries);
}

std::string ftt_to_json(const FunctionalTT& s) {
    const TensorTrain& t = s.train();
    nlohmann::json j;
    j["kind"] = "ftt";
    j["d"] = t.dim();
    j["mode_sizes"] = t.mode_sizes();
    std::vector<int> ranks{1};
    for (int r : t.ranks()) ranks.push_back(r);
    ranks.push_back(1);
    j["ranks"] = ranks;
    auto& domains = j["domains"] = nlohmann::json::array();
    for (const auto& b : s.bases()) domains.push_back({b.domain().lo, b.domain().hi});
    auto& cores = j["cores"] = nlohmann::json::array();
    for (const auto& c : t.cores()) cores.push_back(c.data());
    return j.dump();
}

FunctionalTT ftt_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        if (j.at("kind") != "ftt") throw ArgumentError("ftt json: not a functional TT");
        std::vector<Interval> domains;
        for (const auto& iv : j.at("domains")) domains.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
        return assemble(j.at("mode_sizes").get<std::vector<int>>(), j.at("ranks").get<std::vector<int>>(),
                        domains, j.at("cores").get<std::vector<std::vector<double>>>());
    } catch (const nlohmann::json::exception& e) {
        throw ArgumentError(std::string("ftt json: ") + e.what());
    }
}

void save_ftt(const std::string& path, const FunctionalTT& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot open " + path);
    write_ftt_binary(out, s);
}

FunctionalTT load_ftt(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("cannot open " + path);
    return read_ftt_binary(in);
}

void write_kernel_binary(std::ostream& out, const KernelSurrogate& s) {
    out.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kKindKernel);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.spec().family));
    put<double>(out, s.spec().shape);
    put<double>(out, s.regularization());
    put<std::uint64_t>(out, static_cast<std::uint64_t>(s.centers().rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(s.centers().cols()));
    const Matrix rows = s.centers().transpose();  // row-major on disk
    out.write(reinterpret_cast<const char*>(rows.data()), static_cast<std::streamsize>(sizeof(double) * rows.size()));
    out.write(reinterpret_cast<const char*>(s.coefficients().data()),
              static_cast<std::streamsize>(sizeof(double) * s.coefficients().size()));
    if (!out) throw ArgumentError("kernel record: write failed");
}

KernelSurrogate read_kernel_binary(std::istream& in) {
    check_magic(in, kKindKernel, "kernel");
    const auto family = get<std::uint32_t>(in);
    if (family > 2) throw ArgumentError("kernel record: unknown family");
    KernelSpec spec{static_cast<KernelFamily>(family), get<double>(in)};
    const double reg = get<double>(in);
    const auto m = get<std::uint64_t>(in);
    const auto d = get<std::uint64_t>(in);
    if (m > (1u << 28) || d == 0 || d > 100000) throw ArgumentError("kernel record: implausible sizes");
    Matrix rows(d, m);
    Vector coef(m);
    if (!in.read(reinterpret_cast<char*>(rows.data()), static_cast<std::streamsize>(sizeof(double) * rows.size())) ||
        !in.read(reinterpret_cast<char*>(coef.data()), static_cast<std::streamsize>(sizeof(double) * coef.size())))
        throw ArgumentError("kernel record truncated");
    return KernelSurrogate(spec, rows.transpose(), std::move(coef), reg);
}

std::string kernel_to_json(const KernelSurrogate& s) {
    nlohmann::json j;
    j["kind"] = "kernel";
    j["family"] = to_string(s.spec().family);
    j["shape"] = s.spec().shape;
    j["regularization"] = s.regularization();
    auto& centers = j["centers"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < s.centers().rows(); ++i) {
        const Vector row = s.centers().row(i).transpose();
        centers.push_back(std::vector<double>(row.data(), row.data() + row.size()));
    }
    j["coefficients"] = std::vector<double>(s.coefficients().data(), s.coefficients().data() + s.coefficients().size());
    return j.dump();
}

KernelSurrogate kernel_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.at("kind") != "kernel") throw ArgumentError("kernel json: not a kernel surrogate");
        const KernelSpec spec{parse_kernel_family(j.at("family").get<std::string>()), j.at("shape").get<double>()};
        const auto rows = j.at("centers").get<std::vector<std::vector<double>>>();
        const auto coef = j.at("coefficients").get<std::vector<double>>();
        const std::size_t d = rows.empty() ? 0 : rows[0].size();
        Matrix centers(rows.size(), d);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != d) throw ArgumentError("kernel json: ragged centers");
            for (std::size_t k = 0; k < d; ++k) centers(i, k) = rows[i][k];
        }
        return KernelSurrogate(spec, std::move(centers), Eigen::Map<const Vector>(coef.data(), coef.size()),
                               j.at("regularization").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw ArgumentError(std::string("kernel json: ") + e.what());
    }
}

void save_kernel(const std::string& path, const KernelSurrogate& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot open " + path);
    write_kernel_binary(out, s);
}

KernelSurrogate load_kernel(const std::string& path) { return open_and(path, read_kernel_binary); }

void write_mlp_binary(std::ostream& out, const NeuralSurrogate& s) {
    const MLPConfig& c = s.config();
    out.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kKindMlp);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(c.input_dim));
    put<std::uint64_t>(out, c.hidden_widths.size());
    for (int w : c.hidden_widths) put<std::uint64_t>(out, static_cast<std::uint64_t>(w));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.activation));
    put<std::uint32_t>(out, c.residual ? 1u : 0u);
    put<std::uint64_t>(out, c.seed);
    for (std::size_t l = 0; l < s.params().weights.size(); ++l) {
        const Matrix& w = s.params().weights[l];
        const Vector& b = s.params().biases[l];
        out.write(reinterpret_cast<const char*>(w.data()), static_cast<std::streamsize>(sizeof(double) * w.size()));
        out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(sizeof(double) * b.size()));
    }
    if (!out) throw ArgumentError("mlp record: write failed");
}

NeuralSurrogate read_mlp_binary(std::istream& in) {
    check_magic(in, kKindMlp, "mlp");
    MLPConfig c;
    c.input_dim = static_cast<int>(get<std::uint64_t>(in));
    const auto layers = get<std::uint64_t>(in);
    if (layers > 10000) throw ArgumentError("mlp record: implausible layer count");
    c.hidden_widths.resize(layers);
    for (auto& w : c.hidden_widths) w = static_cast<int>(get<std::uint64_t>(in));
    const auto act = get<std::uint32_t>(in);
    if (act > 1) throw ArgumentError("mlp record: unknown activation");
    c.activation = static_cast<Activation>(act);
    c.residual = get<std::uint32_t>(in) != 0;
    c.seed = get<std::uint64_t>(in);
    if (c.input_dim < 1 || c.input_dim > 100000) throw ArgumentError("mlp record: implausible input dimension");
    for (int w : c.hidden_widths)
        if (w < 1 || w > (1 << 20)) throw ArgumentError("mlp record: implausible width");
    MLPParams p = zero_params(c);
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        Matrix& w = p.weights[l];
        Vector& b = p.biases[l];
        if (!in.read(reinterpret_cast<char*>(w.data()), static_cast<std::streamsize>(sizeof(double) * w.size())) ||
            !in.read(reinterpret_cast<char*>(b.data()), static_cast<std::streamsize>(sizeof(double) * b.size())))
            throw ArgumentError("mlp record truncated");
    }
    return NeuralSurrogate(std::move(c), std::move(p));
}

void save_mlp(const std::string& path, const NeuralSurrogate& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot open " + path);
    write_mlp_binary(out, s);
}

NeuralSurrogate load_mlp(const std::string& path) { return open_and(path, read_mlp_binary); }

}  // namespace hdsurr
