#include "fraisse/io.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "fraisse/errors.hpp"

namespace fraisse::io {

namespace {

json integer_to_json(const mpz_class& z) {
  if (z.fits_slong_p()) return json(static_cast<std::int64_t>(z.get_si()));
  return json(z.get_str());
}

mpz_class integer_from_json(const json& j) {
  if (j.is_number_integer()) {
    if (j.is_number_unsigned()) return mpz_class(std::to_string(j.get<std::uint64_t>()));
    return mpz_class(std::to_string(j.get<std::int64_t>()));
  }
  if (j.is_string()) {
    mpz_class z;
    if (z.set_str(j.get<std::string>(), 10) != 0) throw MalformedSpace("bad integer string");
    return z;
  }
  throw MalformedSpace("expected an integer (number or decimal string)");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

json rational_to_json(const Rational& q) {
  return json::array({integer_to_json(q.get_num()), integer_to_json(q.get_den())});
}

Rational rational_from_json(const json& j) {
  if (j.is_number_integer()) return Rational(integer_from_json(j));
  if (j.is_string()) {
    Rational q;
    if (q.set_str(j.get<std::string>(), 10) != 0 || q.get_den() == 0)
      throw MalformedSpace("bad rational string '" + j.get<std::string>() + "'");
    q.canonicalize();
    return q;
  }
  if (!j.is_array() || j.size() != 2)
    throw MalformedSpace("rational must be a [num, den] pair, an integer or a \"p/q\" string");
  const mpz_class num = integer_from_json(j[0]);
  const mpz_class den = integer_from_json(j[1]);
  if (den <= 0) throw MalformedSpace("rational denominator must be positive");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

json space_to_json(const SpaceDistances& space) {
  json rows = json::array();
  for (std::size_t i = 0; i < space.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < space.size(); ++j) row.push_back(rational_to_json(space.sq(i, j)));
    rows.push_back(std::move(row));
  }
  return json{{"labels", space.labels()}, {"sq_dist", std::move(rows)}};
}

DistanceFile distance_file_from_json(const json& j) {
  if (!j.is_object() || !j.contains("labels") || !j.contains("sq_dist"))
    throw MalformedSpace("space file needs \"labels\" and \"sq_dist\"");
  const json& jl = j.at("labels");
  const json& jd = j.at("sq_dist");
  if (!jl.is_array() || !jd.is_array()) throw MalformedSpace("labels and sq_dist must be arrays");
  std::vector<std::string> labels;
  for (const auto& l : jl) {
    if (!l.is_string()) throw MalformedSpace("labels must be strings");
    labels.push_back(l.get<std::string>());
  }
  const std::size_t n = labels.size();
  RationalMatrix m(n);
  const bool nested = jd.size() == n && (n != 1 || (jd[0].is_array() && jd[0].size() == 1));
  if (nested) {
    if (jd.size() != n) throw MalformedSpace("sq_dist must have one row per label");
    for (std::size_t i = 0; i < n; ++i) {
      if (!jd[i].is_array() || jd[i].size() != n) throw MalformedSpace("sq_dist row has wrong length");
      for (std::size_t c = 0; c < n; ++c) m(i, c) = rational_from_json(jd[i][c]);
    }
  } else {
    if (jd.size() != n * n) throw MalformedSpace("flat sq_dist must hold n*n pairs");
    for (std::size_t k = 0; k < n * n; ++k) m(k / n, k % n) = rational_from_json(jd[k]);
  }
  return DistanceFile{std::move(labels), std::move(m)};
}

SpaceDistances space_from_json(const json& j) {
  DistanceFile f = distance_file_from_json(j);
  return SpaceDistances::from_matrix(std::move(f.labels), std::move(f.sq_dist));
}

DistanceFile read_distance_file(const std::filesystem::path& path) {
  return distance_file_from_json(read_json_file(path));
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedSpace("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw MalformedSpace("invalid JSON in " + path.string() + ": " + e.what());
  }
}

SpaceDistances read_space_file(const std::filesystem::path& path) {
  return space_from_json(read_json_file(path));
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << canonical(j) << '\n';
}

json certificate_to_json(const Certification& cert) {
  json j;
  j["member"] = cert.is_member();
  j["size"] = cert.gram.size();
  if (cert.is_member()) {
    json pivots = json::array();
    Rational det = 1;
    for (const Rational& p : *cert.gram.pd_certificate) {
      pivots.push_back(rational_to_json(p));
      det *= p;
    }
    j["pivots"] = std::move(pivots);
    j["determinant"] = rational_to_json(det);
  } else {
    j["pivot_index"] = cert.rejection->pivot_index;
    j["leading_minor"] = rational_to_json(cert.rejection->leading_minor);
  }
  return j;
}

json coords_to_json(const Eigen::MatrixXd& coords) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < coords.cols(); ++c) row.push_back(coords(i, c));
    rows.push_back(std::move(row));
  }
  return json{{"coords", std::move(rows)}};
}

json estimate_to_json(const Estimate& e) {
  return json{{"value", e.value}, {"std_error", e.std_error}, {"n_samples", e.n_samples}, {"seed", e.seed}};
}

json mixing_to_json(const MixingReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows) {
    rows.push_back(json{{"k", r.k},
                        {"cross_scale", rational_to_json(r.cross_scale)},
                        {"joint", estimate_to_json(r.joint)},
                        {"single", estimate_to_json(r.single)},
                        {"product", estimate_to_json(r.product)},
                        {"kl", r.kl},
                        {"tv_bound", r.tv_bound}});
  }
  return json{{"rows", std::move(rows)}, {"seed", rep.seed}, {"samples", rep.samples}};
}

std::string mixing_csv(const MixingReport& rep) {
  std::string out = "k,joint,product,kl,tv_bound\n";
  for (const auto& r : rep.rows) {
    out += std::to_string(r.k) + "," + format_double(r.joint.value) + "," +
           format_double(r.product.value) + "," + format_double(r.kl) + "," +
           format_double(r.tv_bound) + "\n";
  }
  return out;
}

json orders_to_json(const OrderDistribution& dist) {
  json probs = json::object();
  for (const auto& [o, e] : dist.probs)
    probs[o] = json{{"estimate", e.value}, {"std_error", e.std_error}, {"count", dist.counts.at(o)}};
  return json{{"k", dist.k},       {"indices", dist.indices}, {"probs", std::move(probs)},
              {"n_samples", dist.n_samples}, {"seed", dist.seed}, {"ties", dist.ties},
              {"tie_flag", dist.tie_flag}};
}

std::string space_hash(const SpaceDistances& space) { return sha256_hex(canonical(space_to_json(space))); }

std::string samples_csv(const SpaceDistances& space, const SampleMatrix& draws) {
  std::string out;
  for (std::size_t c = 0; c < space.size(); ++c) {
    if (c) out += ',';
    out += space.labels()[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < draws.rows; ++r) {
    for (std::size_t c = 0; c < draws.cols; ++c) {
      if (c) out += ',';
      out += format_double(draws(r, c));
    }
    out += '\n';
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

std::string canonical(const json& j) { return j.dump(2); }

json write_chain(const std::filesystem::path& dir, const GenericChain& chain, const json& provenance) {
  std::filesystem::create_directories(dir);
  json stages = json::array();
  for (std::size_t s = 0; s < chain.stages.size(); ++s) {
    char name[32];
    std::snprintf(name, sizeof name, "stage_%03zu.json", s);
    json body = space_to_json(chain.stages[s]);
    const std::string digest = sha256_hex(canonical(body));
    if (provenance.is_object()) body.update(provenance);
    write_json_file(dir / name, body);
    stages.push_back(json{{"file", name}, {"points", chain.stages[s].size()}, {"sha256", digest}});
  }
  json log = json::array();
  for (const auto& rec : chain.log)
    log.push_back(json{{"stage", rec.stage}, {"points_added", rec.points_added},
                       {"rng_position", rec.rng_position}, {"denom_bits", rec.denom_bits}});
  json manifest{{"seed", chain.seed},
                {"snapping", {{"denom_bits", chain.policy.denom_bits}, {"retries", chain.policy.retries}}},
                {"point_measure", "uniform on the unit sphere of R^(n+k) (modeling choice)"},
                {"stages", std::move(stages)},
                {"log", std::move(log)}};
  if (provenance.is_object()) manifest.update(provenance);
  write_json_file(dir / "manifest.json", manifest);
  return manifest;
}

}  // namespace fraisse::io
