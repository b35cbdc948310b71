#include "placecrb/scenario_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

namespace placecrb {

namespace {

struct Token {
    enum Kind { Ident, Number, LBrace, RBrace, LBracket, RBracket, Equals, Comma, End };
    Kind kind;
    std::string text;
    double number = 0.0;
    int line = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    Token next() {
        skip_space();
        Token tok;
        tok.line = line_;
        if (pos_ >= text_.size()) {
            tok.kind = Token::End;
            return tok;
        }
        const char c = text_[pos_];
        switch (c) {
        case '{': ++pos_; tok.kind = Token::LBrace; return tok;
        case '}': ++pos_; tok.kind = Token::RBrace; return tok;
        case '[': ++pos_; tok.kind = Token::LBracket; return tok;
        case ']': ++pos_; tok.kind = Token::RBracket; return tok;
        case '=': ++pos_; tok.kind = Token::Equals; return tok;
        case ',': ++pos_; tok.kind = Token::Comma; return tok;
        default: break;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            tok.kind = Token::Ident;
            tok.text = text_.substr(start, pos_ - start);
            return tok;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
            const char* begin = text_.c_str() + pos_;
            char* end = nullptr;
            tok.number = std::strtod(begin, &end);
            if (end == begin) {
                throw ParseError("line " + std::to_string(line_) + ": malformed number");
            }
            pos_ += static_cast<std::size_t>(end - begin);
            tok.kind = Token::Number;
            return tok;
        }
        throw ParseError("line " + std::to_string(line_) + ": unexpected character '" +
                         std::string(1, c) + "'");
    }

private:
    void skip_space() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

struct Value {
    enum Kind { Number, Ident, List } kind = Number;
    double number = 0.0;
    std::string ident;
    std::vector<Value> items;
    int line = 0;
};

struct Section {
    std::vector<std::pair<std::string, Value>> values;
    std::vector<std::pair<std::string, Section>> sections;
    int line = 0;
};

class Parser {
public:
    explicit Parser(const std::string& text) : lexer_(text) { advance(); }

    Section parse_document() {
        Section root = parse_body(/*toplevel=*/true);
        expect(Token::End, "end of input");
        return root;
    }

private:
    Section parse_body(bool toplevel) {
        Section section;
        section.line = current_.line;
        while (true) {
            if (current_.kind == Token::End) {
                if (!toplevel) fail("'}'");
                return section;
            }
            if (current_.kind == Token::RBrace) {
                if (toplevel) fail("key");
                advance();
                return section;
            }
            if (current_.kind != Token::Ident) fail("key");
            const std::string key = current_.text;
            const int line = current_.line;
            advance();
            if (current_.kind == Token::LBrace) {
                advance();
                Section child = parse_body(false);
                child.line = line;
                section.sections.emplace_back(key, std::move(child));
            } else if (current_.kind == Token::Equals) {
                advance();
                section.values.emplace_back(key, parse_value());
            } else {
                fail("'=' or '{'");
            }
        }
    }

    Value parse_value() {
        Value v;
        v.line = current_.line;
        if (current_.kind == Token::Number) {
            v.kind = Value::Number;
            v.number = current_.number;
            advance();
        } else if (current_.kind == Token::Ident) {
            v.kind = Value::Ident;
            v.ident = current_.text;
            advance();
        } else if (current_.kind == Token::LBracket) {
            advance();
            v.kind = Value::List;
            while (current_.kind != Token::RBracket) {
                v.items.push_back(parse_value());
                if (current_.kind == Token::Comma) {
                    advance();
                } else if (current_.kind != Token::RBracket) {
                    fail("',' or ']'");
                }
            }
            advance();
        } else {
            fail("value");
        }
        return v;
    }

    void expect(Token::Kind kind, const char* what) {
        if (current_.kind != kind) fail(what);
    }

    [[noreturn]] void fail(const char* expected) {
        throw ParseError("line " + std::to_string(current_.line) + ": expected " +
                         std::string(expected));
    }

    void advance() { current_ = lexer_.next(); }

    Lexer lexer_;
    Token current_;
};

[[noreturn]] void unknown_key(const std::string& context, const std::string& key, int line) {
    throw ParseError("line " + std::to_string(line) + ": unknown key '" + key +
                     "' in " + context);
}

/// Strict schema walker over one section: every value/subsection must be
/// consumed exactly once by the accessors below.
class SectionReader {
public:
    SectionReader(const Section& section, std::string context)
        : section_(section), context_(std::move(context)),
          value_used_(section.values.size(), false),
          section_used_(section.sections.size(), false) {}

    std::optional<double> take_number(const std::string& key) {
        std::optional<double> result;
        for (std::size_t i = 0; i < section_.values.size(); ++i) {
            if (section_.values[i].first != key) continue;
            if (result) {
                throw ParseError("line " + std::to_string(section_.values[i].second.line) +
                                 ": duplicate key '" + key + "' in " + context_);
            }
            if (section_.values[i].second.kind != Value::Number) {
                throw ParseError("line " + std::to_string(section_.values[i].second.line) +
                                 ": key '" + key + "' in " + context_ + " must be a number");
            }
            result = section_.values[i].second.number;
            value_used_[i] = true;
        }
        return result;
    }

    double require_number(const std::string& key) {
        auto v = take_number(key);
        if (!v) {
            throw ParseError("line " + std::to_string(section_.line) + ": missing key '" +
                             key + "' in " + context_);
        }
        return *v;
    }

    std::optional<const Value*> take_list(const std::string& key) {
        std::optional<const Value*> result;
        for (std::size_t i = 0; i < section_.values.size(); ++i) {
            if (section_.values[i].first != key) continue;
            if (result) {
                throw ParseError("line " + std::to_string(section_.values[i].second.line) +
                                 ": duplicate key '" + key + "' in " + context_);
            }
            if (section_.values[i].second.kind != Value::List) {
                throw ParseError("line " + std::to_string(section_.values[i].second.line) +
                                 ": key '" + key + "' in " + context_ + " must be a list");
            }
            result = &section_.values[i].second;
            value_used_[i] = true;
        }
        return result;
    }

    std::optional<std::string> take_ident(const std::string& key) {
        std::optional<std::string> result;
        for (std::size_t i = 0; i < section_.values.size(); ++i) {
            if (section_.values[i].first != key) continue;
            if (result) {
                throw ParseError("line " + std::to_string(section_.values[i].second.line) +
                                 ": duplicate key '" + key + "' in " + context_);
            }
            if (section_.values[i].second.kind != Value::Ident) {
                throw ParseError("line " + std::to_string(section_.values[i].second.line) +
                                 ": key '" + key + "' in " + context_ + " must be an identifier");
            }
            result = section_.values[i].second.ident;
            value_used_[i] = true;
        }
        return result;
    }

    std::optional<const Section*> take_section(const std::string& key) {
        std::optional<const Section*> result;
        for (std::size_t i = 0; i < section_.sections.size(); ++i) {
            if (section_.sections[i].first != key) continue;
            if (result) {
                throw ParseError("line " + std::to_string(section_.sections[i].second.line) +
                                 ": duplicate section '" + key + "' in " + context_);
            }
            result = &section_.sections[i].second;
            section_used_[i] = true;
        }
        return result;
    }

    const Section* require_section(const std::string& key) {
        auto s = take_section(key);
        if (!s) {
            throw ParseError("line " + std::to_string(section_.line) +
                             ": missing section '" + key + "' in " + context_);
        }
        return *s;
    }

    std::vector<const Section*> take_sections(const std::string& key) {
        std::vector<const Section*> result;
        for (std::size_t i = 0; i < section_.sections.size(); ++i) {
            if (section_.sections[i].first != key) continue;
            result.push_back(&section_.sections[i].second);
            section_used_[i] = true;
        }
        return result;
    }

    void reject_unknown() const {
        for (std::size_t i = 0; i < section_.values.size(); ++i) {
            if (!value_used_[i]) {
                unknown_key(context_, section_.values[i].first, section_.values[i].second.line);
            }
        }
        for (std::size_t i = 0; i < section_.sections.size(); ++i) {
            if (!section_used_[i]) {
                unknown_key(context_, section_.sections[i].first, section_.sections[i].second.line);
            }
        }
    }

private:
    const Section& section_;
    std::string context_;
    std::vector<bool> value_used_;
    std::vector<bool> section_used_;
};

SensorPolar parse_sensor(const Section& section, SourcePosition source) {
    SectionReader reader(section, "sensor");
    const auto angle_deg = reader.take_number("angle_deg");
    const auto distance = reader.take_number("distance");
    const auto x = reader.take_number("x");
    const auto y = reader.take_number("y");
    reader.reject_unknown();

    if (angle_deg && distance && !x && !y) {
        if (!(*distance > 0.0)) {
            throw ParseError("line " + std::to_string(section.line) +
                             ": sensor distance must be positive");
        }
        return SensorPolar{wrap_angle(deg2rad(*angle_deg)), *distance};
    }
    if (x && y && !angle_deg && !distance) {
        const double dx = source.x - *x;
        const double dy = source.y - *y;
        const double d = std::hypot(dx, dy);
        if (d == 0.0) {
            throw ParseError("line " + std::to_string(section.line) +
                             ": sensor coincides with the source");
        }
        return SensorPolar{wrap_angle(std::atan2(dy, dx)), d};
    }
    throw ParseError("line " + std::to_string(section.line) +
                     ": sensor needs either {angle_deg, distance} or {x, y}");
}

MeasurementCombo parse_combo(const Value& list) {
    MeasurementCombo combo;
    for (const Value& item : list.items) {
        if (item.kind != Value::Ident) {
            throw ParseError("line " + std::to_string(item.line) +
                             ": combo entries must be modality names");
        }
        if (item.ident == "TDOA") combo = combo.with(Modality::Tdoa);
        else if (item.ident == "AOA") combo = combo.with(Modality::Aoa);
        else if (item.ident == "RSS") combo = combo.with(Modality::Rss);
        else if (item.ident == "TOA") combo = combo.with(Modality::Toa);
        else {
            throw ParseError("line " + std::to_string(item.line) + ": unknown modality '" +
                             item.ident + "' (expected TDOA, AOA, RSS or TOA)");
        }
    }
    return combo;
}

SourcePosition parse_source(const Section& section) {
    SectionReader reader(section, "source");
    SourcePosition source{reader.require_number("x"), reader.require_number("y")};
    reader.reject_unknown();
    return source;
}

NoiseModel parse_noise(const Section& section) {
    SectionReader reader(section, "noise");
    NoiseModel noise;
    noise.sigma = reader.take_number("sigma").value_or(0.0);
    noise.rho = deg2rad(reader.take_number("rho_deg").value_or(0.0));
    noise.delta = reader.take_number("delta").value_or(0.0);
    noise.gamma = reader.take_number("gamma").value_or(0.0);
    noise.p0 = reader.take_number("p0").value_or(0.0);
    noise.xi = reader.take_number("xi").value_or(0.0);
    reader.reject_unknown();
    return noise;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void format_double(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

/// Degrees value whose parse reproduces the stored radians exactly, when
/// such a value exists within a few ulp of the direct conversion. Sensor
/// azimuths go through wrap_angle on parse, rho does not.
double degrees_preimage(double rad, bool wrapped) {
    auto back = [wrapped](double deg) {
        return wrapped ? wrap_angle(deg2rad(deg)) : deg2rad(deg);
    };
    double deg = rad2deg(rad);
    if (back(deg) == rad) return deg;
    double lo = deg, hi = deg;
    for (int k = 0; k < 4; ++k) {
        lo = std::nextafter(lo, -1e300);
        if (back(lo) == rad) return lo;
        hi = std::nextafter(hi, 1e300);
        if (back(hi) == rad) return hi;
    }
    return deg;
}

} // namespace

Scenario parse_scenario(const std::string& text) {
    Parser parser(text);
    const Section root = parser.parse_document();
    SectionReader reader(root, "scenario");

    Scenario s;
    s.geometry.source = parse_source(*reader.require_section("source"));

    const Section* sensors = reader.require_section("sensors");
    SectionReader sensors_reader(*sensors, "sensors");
    for (const Section* sensor : sensors_reader.take_sections("sensor")) {
        s.geometry.sensors.push_back(parse_sensor(*sensor, s.geometry.source));
    }
    sensors_reader.reject_unknown();

    if (const auto noise = reader.take_section("noise")) s.noise = parse_noise(**noise);

    const auto combo = reader.take_list("combo");
    if (!combo) throw ParseError("missing key 'combo' in scenario");
    s.combo = parse_combo(**combo);

    if (const auto ref = reader.take_number("reference")) {
        if (*ref != std::floor(*ref) || *ref < 0) {
            throw ParseError("scenario key 'reference' must be a non-negative integer");
        }
        s.geometry.reference_index = static_cast<int>(*ref);
    }
    reader.reject_unknown();
    return s;
}

Scenario load_scenario(const std::string& path) {
    return parse_scenario(read_file(path));
}

std::string write_scenario(const Scenario& s) {
    std::string out;
    out += "source { x = ";
    format_double(out, s.geometry.source.x);
    out += "  y = ";
    format_double(out, s.geometry.source.y);
    out += " }\n";
    out += "sensors {\n";
    for (const SensorPolar& sp : s.geometry.sensors) {
        out += "  sensor { angle_deg = ";
        format_double(out, degrees_preimage(sp.alpha, true));
        out += "  distance = ";
        format_double(out, sp.range);
        out += " }\n";
    }
    out += "}\n";
    out += "noise {\n";
    const NoiseModel& n = s.noise;
    out += "  sigma = ";
    format_double(out, n.sigma);
    out += "\n  rho_deg = ";
    format_double(out, degrees_preimage(n.rho, false));
    out += "\n  delta = ";
    format_double(out, n.delta);
    out += "\n  gamma = ";
    format_double(out, n.gamma);
    out += "\n  p0 = ";
    format_double(out, n.p0);
    out += "\n  xi = ";
    format_double(out, n.xi);
    out += "\n}\n";
    out += "combo = [";
    if (!s.combo.empty()) {
        const std::string name = combo_name(s.combo);
        for (char c : name) out += (c == '-') ? std::string(", ") : std::string(1, c);
    }
    out += "]\n";
    out += "reference = " + std::to_string(s.geometry.reference_index) + "\n";
    return out;
}

std::vector<NamedGeometry> parse_geometries(const std::string& text,
                                            SourcePosition source,
                                            int reference_index) {
    Parser parser(text);
    const Section root = parser.parse_document();
    SectionReader reader(root, "geometries file");

    std::vector<NamedGeometry> result;
    for (const Section* section : reader.take_sections("geometry")) {
        SectionReader geo_reader(*section, "geometry");
        NamedGeometry named;
        const auto id = geo_reader.take_ident("id");
        named.id = id ? *id : ("geometry_" + std::to_string(result.size()));
        named.geometry.source = source;
        named.geometry.reference_index = reference_index;
        for (const Section* sensor : geo_reader.take_sections("sensor")) {
            named.geometry.sensors.push_back(parse_sensor(*sensor, source));
        }
        geo_reader.reject_unknown();
        if (named.geometry.size() < 3) {
            throw ParseError("geometry '" + named.id + "' needs at least 3 sensors");
        }
        result.push_back(std::move(named));
    }
    reader.reject_unknown();
    return result;
}

std::vector<NamedGeometry> load_geometries(const std::string& path,
                                           SourcePosition source,
                                           int reference_index) {
    return parse_geometries(read_file(path), source, reference_index);
}

} // namespace placecrb
