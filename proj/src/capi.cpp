#include "irsp/irsp.h"

#include <cstdlib>
#include <cstring>
#include <new>

#include "irsp/pipeline.hpp"
#include "irsp/specialfn.hpp"

struct irsp_config {
  irsp::ExperimentConfig value;
};

struct irsp_sample {
  irsp::FieldSample value;
};

namespace {

thread_local std::string g_last_error;

irsp_status status_of(irsp::ErrorCode code) {
  using irsp::ErrorCode;
  switch (code) {
    case ErrorCode::Domain: return IRSP_ERR_DOMAIN;
    case ErrorCode::UnsupportedOrder: return IRSP_ERR_UNSUPPORTED_ORDER;
    case ErrorCode::Spec: return IRSP_ERR_SPEC;
    case ErrorCode::Geometry: return IRSP_ERR_GEOMETRY;
    case ErrorCode::Sweep: return IRSP_ERR_SWEEP;
    case ErrorCode::Statistics: return IRSP_ERR_STATISTICS;
    case ErrorCode::Conditioning: return IRSP_ERR_CONDITIONING;
    case ErrorCode::Unsupported: return IRSP_ERR_UNSUPPORTED;
    case ErrorCode::Config: return IRSP_ERR_CONFIG;
    case ErrorCode::MissingInput: return IRSP_ERR_MISSING_INPUT;
    case ErrorCode::Io: return IRSP_ERR_IO;
    case ErrorCode::Singularity: return IRSP_ERR_SINGULARITY;
  }
  return IRSP_ERR_INTERNAL;
}

template <class F>
irsp_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const irsp::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return IRSP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return IRSP_ERR_INTERNAL;
  }
}

irsp_status invalid(const char* what) {
  g_last_error = what;
  return IRSP_ERR_INVALID_ARGUMENT;
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char** slot, const std::string& s) {
  if (slot != nullptr) *slot = copy_string(s);
}

irsp::Point point_of(const double* x) { return {x[0], x[1], x[2]}; }

void put(double* out, const irsp::Complex& z) {
  out[0] = z.real();
  out[1] = z.imag();
}

irsp_status finish_command(const irsp::CommandResult& r, char** run_dir, char** report) {
  emit(run_dir, r.run_dir);
  emit(report, r.report);
  return IRSP_OK;
}

}  // namespace

extern "C" {

const char* irsp_last_error(void) { return g_last_error.c_str(); }

const char* irsp_status_name(irsp_status status) {
  switch (status) {
    case IRSP_OK: return "ok";
    case IRSP_ERR_DOMAIN: return "domain";
    case IRSP_ERR_UNSUPPORTED_ORDER: return "unsupported_order";
    case IRSP_ERR_SPEC: return "spec";
    case IRSP_ERR_GEOMETRY: return "geometry";
    case IRSP_ERR_SWEEP: return "sweep";
    case IRSP_ERR_STATISTICS: return "statistics";
    case IRSP_ERR_CONDITIONING: return "conditioning";
    case IRSP_ERR_UNSUPPORTED: return "unsupported";
    case IRSP_ERR_CONFIG: return "config";
    case IRSP_ERR_MISSING_INPUT: return "missing_input";
    case IRSP_ERR_IO: return "io";
    case IRSP_ERR_SINGULARITY: return "singularity";
    case IRSP_ERR_VALIDATION: return "validation";
    case IRSP_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case IRSP_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* irsp_version(void) { return irsp::version_string(); }

void irsp_string_free(char* s) { std::free(s); }

irsp_status irsp_set_threads(int threads) {
  if (threads < 1) return invalid("threads must be >= 1");
  return guarded([&] {
    irsp::set_thread_count(threads);
    return IRSP_OK;
  });
}

irsp_status irsp_set_warning_handler(irsp_warning_fn fn, void* user) {
  return guarded([&] {
    if (fn == nullptr) {
      irsp::set_warning_handler(nullptr);
    } else {
      irsp::set_warning_handler([fn, user](const std::string& m) { fn(m.c_str(), user); });
    }
    return IRSP_OK;
  });
}

irsp_status irsp_config_new(irsp_config** out) {
  if (out == nullptr) return invalid("null output");
  return guarded([&] {
    *out = new irsp_config{};
    return IRSP_OK;
  });
}

irsp_status irsp_config_parse(const char* text, irsp_config** out) {
  if (text == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    *out = new irsp_config{irsp::ExperimentConfig::parse(text)};
    return IRSP_OK;
  });
}

irsp_status irsp_config_load(const char* path, irsp_config** out) {
  if (path == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    *out = new irsp_config{irsp::ExperimentConfig::load(path)};
    return IRSP_OK;
  });
}

irsp_status irsp_config_set(irsp_config* config, const char* key, const char* value) {
  if (config == nullptr || key == nullptr || value == nullptr) return invalid("null argument");
  return guarded([&] {
    config->value.set(key, value);
    return IRSP_OK;
  });
}

irsp_status irsp_config_get(const irsp_config* config, const char* key, char** value) {
  if (config == nullptr || key == nullptr || value == nullptr) return invalid("null argument");
  return guarded([&] {
    *value = copy_string(config->value.get(key));
    return IRSP_OK;
  });
}

irsp_status irsp_config_serialize(const irsp_config* config, char** text) {
  if (config == nullptr || text == nullptr) return invalid("null argument");
  return guarded([&] {
    *text = copy_string(config->value.serialize());
    return IRSP_OK;
  });
}

irsp_status irsp_config_hash(const irsp_config* config, uint64_t* hash) {
  if (config == nullptr || hash == nullptr) return invalid("null argument");
  return guarded([&] {
    *hash = config->value.hash();
    return IRSP_OK;
  });
}

irsp_status irsp_config_validate(const irsp_config* config) {
  if (config == nullptr) return invalid("null config");
  return guarded([&] {
    config->value.validate();
    return IRSP_OK;
  });
}

irsp_status irsp_config_schema(char** text) {
  if (text == nullptr) return invalid("null output");
  return guarded([&] {
    std::string s;
    for (const auto& k : irsp::config_schema()) {
      s += std::string(k.name) + "\t" + k.fallback + "\t" + k.help + "\n";
    }
    *text = copy_string(s);
    return IRSP_OK;
  });
}

void irsp_config_free(irsp_config* config) { delete config; }

irsp_status irsp_sample_create(const irsp_config* config, uint64_t seed, irsp_sample** out) {
  if (config == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    config->value.validate();
    const irsp::FieldSpec spec = config->value.field_spec();
    *out = new irsp_sample{spec.components == 1 ? irsp::sample_field(spec, seed)
                                                : irsp::sample_vector_field(spec, seed)};
    return IRSP_OK;
  });
}

irsp_status irsp_sample_load(const char* stem, irsp_sample** out) {
  if (stem == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    *out = new irsp_sample{irsp::read_sample(stem)};
    return IRSP_OK;
  });
}

irsp_status irsp_sample_save(const irsp_sample* sample, const char* stem, int csv) {
  if (sample == nullptr || stem == nullptr) return invalid("null argument");
  return guarded([&] {
    irsp::write_sample(sample->value, stem,
                       csv ? irsp::SampleFormat::Csv : irsp::SampleFormat::Binary);
    return IRSP_OK;
  });
}

irsp_status irsp_sample_shape(const irsp_sample* sample, int* dim, int* n, int* components) {
  if (sample == nullptr) return invalid("null sample");
  const auto& spec = sample->value.spec;
  if (dim != nullptr) *dim = spec.dimension;
  if (n != nullptr) *n = spec.grid.n;
  if (components != nullptr) *components = spec.components;
  return IRSP_OK;
}

irsp_status irsp_sample_values(const irsp_sample* sample, int component, const double** values,
                               size_t* count) {
  if (sample == nullptr || values == nullptr || count == nullptr) return invalid("null argument");
  if (component < 0 || component >= static_cast<int>(sample->value.values.size())) {
    return invalid("component out of range");
  }
  const auto& v = sample->value.values[static_cast<std::size_t>(component)];
  *values = v.data();
  *count = v.size();
  return IRSP_OK;
}

void irsp_sample_free(irsp_sample* sample) { delete sample; }

irsp_status irsp_acoustic_field(const irsp_sample* sample, double kappa, const double* x,
                                int truncated, double* out) {
  if (sample == nullptr || x == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    const irsp::Point p = point_of(x);
    put(out, truncated ? irsp::acoustic_field_trunc(sample->value, kappa, p)
                       : irsp::acoustic_field(sample->value, kappa, p));
    return IRSP_OK;
  });
}

irsp_status irsp_elastic_field(const irsp_sample* sample, double omega, double lambda, double mu,
                               const double* x, int truncated, double* out) {
  if (sample == nullptr || x == nullptr || out == nullptr) return invalid("null argument");
  return guarded([&] {
    irsp::ElasticParams e{omega, lambda, mu};
    const irsp::Point p = point_of(x);
    const irsp::FieldVector u = truncated ? irsp::elastic_field_trunc(sample->value, e, p)
                                          : irsp::elastic_field(sample->value, e, p);
    for (int c = 0; c < sample->value.spec.dimension; ++c) {
      put(out + 2 * c, u[static_cast<std::size_t>(c)]);
    }
    return IRSP_OK;
  });
}

irsp_status irsp_bessel(int kind, int n, double t, double* out) {
  if (out == nullptr) return invalid("null output");
  if (kind != 0 && kind != 1) return invalid("kind must be 0 (J) or 1 (Y)");
  return guarded([&] {
    *out = irsp::specialfn::bessel(kind == 0 ? irsp::specialfn::BesselKind::J : irsp::specialfn::BesselKind::Y, n, t);
    return IRSP_OK;
  });
}

irsp_status irsp_hankel1(int n, double t, double* out) {
  if (out == nullptr) return invalid("null output");
  return guarded([&] {
    put(out, irsp::specialfn::hankel1(n, t));
    return IRSP_OK;
  });
}

irsp_status irsp_hankel1_trunc(int n, int terms, double t, double* out) {
  if (out == nullptr) return invalid("null output");
  return guarded([&] {
    put(out, irsp::specialfn::hankel1_trunc(n, terms, t));
    return IRSP_OK;
  });
}

irsp_status irsp_cmd_sample(const irsp_config* config, char** run_dir, char** report) {
  if (config == nullptr) return invalid("null config");
  return guarded([&] { return finish_command(irsp::cmd_sample(config->value), run_dir, report); });
}

irsp_status irsp_cmd_forward(const irsp_config* config, char** run_dir, char** report) {
  if (config == nullptr) return invalid("null config");
  return guarded([&] { return finish_command(irsp::cmd_forward(config->value), run_dir, report); });
}

irsp_status irsp_cmd_sweep(const irsp_config* config, int seed_given, char** run_dir,
                           char** report) {
  if (config == nullptr) return invalid("null config");
  return guarded([&] {
    return finish_command(irsp::cmd_sweep(config->value, seed_given != 0), run_dir, report);
  });
}

irsp_status irsp_cmd_invert(const irsp_config* config, char** run_dir, char** report) {
  if (config == nullptr) return invalid("null config");
  return guarded([&] { return finish_command(irsp::cmd_invert(config->value), run_dir, report); });
}

irsp_status irsp_cmd_validate(const irsp_config* config, const char* suite, char** run_dir,
                              char** report) {
  if (config == nullptr || suite == nullptr) return invalid("null argument");
  return guarded([&] {
    const irsp::CommandResult r = irsp::cmd_validate(config->value, suite);
    finish_command(r, run_dir, report);
    if (!r.passed) {
      g_last_error = std::string("validation failed: ") + suite;
      return IRSP_ERR_VALIDATION;
    }
    return IRSP_OK;
  });
}

}  // extern "C"
