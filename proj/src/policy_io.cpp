#include "abrmdp/policy_io.hpp"

#include "abrmdp/csv.hpp"
#include "abrmdp/errors.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace abrmdp {

namespace {

template <typename T>
T expect_field(std::istream& in, const std::string& key)
{
    std::string word;
    T value{};
    if (!(in >> word) || word != key || !(in >> value)) {
        throw ConfigError("policy file: expected '" + key + "' header line");
    }
    return value;
}

double parse_double(const std::string& token)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw ConfigError("policy file: bad value '" + token + "'");
    }
    return v;
}

} // namespace

void write_policy_table(std::ostream& out, const PolicyTable& table, std::uint64_t fingerprint)
{
    const auto& space = table.space();
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << fingerprint;

    std::string text;
    text += "abrmdp-policy 1\n";
    text += "M " + std::to_string(space.num_rates()) + "\n";
    text += "K " + std::to_string(space.num_channel_states()) + "\n";
    text += "N " + std::to_string(space.num_users()) + "\n";
    text += "T " + std::to_string(table.horizon()) + "\n";
    text += std::string("ordering ") + kStateOrdering + "\n";
    text += "fingerprint " + hex.str() + "\n";
    text += "records " + std::to_string(table.horizon() * space.num_states()) + "\n";
    out << text;

    for (std::size_t t = 0; t < table.horizon(); ++t) {
        for (std::size_t s = 0; s < space.num_states(); ++s) {
            std::string line = std::to_string(t) + ' ' + std::to_string(s);
            for (std::size_t r : space.decode_action(table.action_index(t, s))) {
                line += ' ';
                line += std::to_string(r);
            }
            line += ' ';
            line += format_double(table.value(t, s));
            line += '\n';
            out << line;
        }
    }
}

void save_policy_table(const std::filesystem::path& path, const PolicyTable& table,
                       std::uint64_t fingerprint)
{
    std::ostringstream out;
    write_policy_table(out, table, fingerprint);
    write_file_atomically(path, out.str());
}

LoadedPolicy read_policy_table(std::istream& in)
{
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "abrmdp-policy" || version != 1) {
        throw ConfigError("policy file: unrecognized header");
    }
    const auto m = expect_field<std::size_t>(in, "M");
    const auto k = expect_field<std::size_t>(in, "K");
    const auto n = expect_field<std::size_t>(in, "N");
    const auto horizon = expect_field<std::size_t>(in, "T");
    if (expect_field<std::string>(in, "ordering") != kStateOrdering) {
        throw ConfigError("policy file: unsupported state ordering");
    }
    const auto fp_hex = expect_field<std::string>(in, "fingerprint");
    const auto records = expect_field<std::size_t>(in, "records");

    const StateSpace space(m, k, n);
    if (horizon == 0 || records != horizon * space.num_states()) {
        throw ConfigError("policy file: record count does not match M, K, N and T");
    }

    std::uint64_t fingerprint = 0;
    {
        const auto [ptr, ec] =
            std::from_chars(fp_hex.data(), fp_hex.data() + fp_hex.size(), fingerprint, 16);
        if (ec != std::errc{} || ptr != fp_hex.data() + fp_hex.size()) {
            throw ConfigError("policy file: bad fingerprint");
        }
    }

    std::vector<std::uint32_t> actions(records);
    std::vector<double> values((horizon + 1) * space.num_states(), 0.0);
    Action action(n);
    std::string value_token;
    for (std::size_t rec = 0; rec < records; ++rec) {
        std::size_t t = 0;
        std::size_t s = 0;
        if (!(in >> t >> s)) {
            throw ConfigError("policy file: truncated at record " + std::to_string(rec));
        }
        for (auto& r : action) {
            if (!(in >> r)) {
                throw ConfigError("policy file: truncated at record " + std::to_string(rec));
            }
        }
        if (!(in >> value_token)) {
            throw ConfigError("policy file: truncated at record " + std::to_string(rec));
        }
        if (t * space.num_states() + s != rec || !space.valid(action)) {
            throw ConfigError("policy file: record " + std::to_string(rec) + " out of order or range");
        }
        actions[rec] = static_cast<std::uint32_t>(space.encode_action(action));
        values[rec] = parse_double(value_token);
    }
    return {PolicyTable(space, horizon, std::move(actions), std::move(values)), fingerprint};
}

LoadedPolicy load_policy_table(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open policy table " + path.string());
    }
    return read_policy_table(in);
}

} // namespace abrmdp
