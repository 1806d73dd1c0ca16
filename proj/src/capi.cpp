#include "taghead.h"

#include <new>
#include <string>

#include "harness.hpp"
#include "util.hpp"

struct tag_session {
  tag::RunConfig config;
  std::string out_dir;
  std::string error;
  std::string summary;
};

namespace {

constexpr const char* kVersion = "1.0.0";

tag_status classify_exception(tag_session* s) {
  try {
    throw;
  } catch (const tag::ConfigError& e) {
    if (s) s->error = e.what();
    return TAG_ERR_CONFIG;
  } catch (const tag::ShapeError& e) {
    if (s) s->error = e.what();
    return TAG_ERR_SHAPE;
  } catch (const tag::IoError& e) {
    if (s) s->error = e.what();
    return TAG_ERR_IO;
  } catch (const tag::StateError& e) {
    if (s) s->error = e.what();
    return TAG_ERR_STATE;
  } catch (const tag::CapacityError& e) {
    if (s) s->error = e.what();
    return TAG_ERR_CAPACITY;
  } catch (const std::invalid_argument& e) {
    if (s) s->error = e.what();
    return TAG_ERR_ARGUMENT;
  } catch (const std::exception& e) {
    if (s) s->error = e.what();
    return TAG_ERR_INTERNAL;
  } catch (...) {
    if (s) s->error = "unknown error";
    return TAG_ERR_INTERNAL;
  }
}

template <typename Fn>
tag_status run_command(tag_session* session, Fn&& fn) {
  if (!session) return TAG_ERR_ARGUMENT;
  session->error.clear();
  try {
    tag::CommandOutput out = fn();
    session->summary = out.summary;
    return TAG_OK;
  } catch (...) {
    return classify_exception(session);
  }
}

}  // namespace

extern "C" {

const char* tag_version(void) { return kVersion; }

const char* tag_status_name(tag_status status) {
  switch (status) {
    case TAG_OK: return "ok";
    case TAG_ERR_ARGUMENT: return "argument";
    case TAG_ERR_CONFIG: return "config";
    case TAG_ERR_IO: return "io";
    case TAG_ERR_SHAPE: return "shape";
    case TAG_ERR_STATE: return "state";
    case TAG_ERR_CAPACITY: return "capacity";
    case TAG_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

tag_status tag_session_open(const char* config_path, const char* out_dir, tag_session** session_out) {
  if (!config_path || !out_dir || !session_out) return TAG_ERR_ARGUMENT;
  *session_out = nullptr;
  tag_session* s = new (std::nothrow) tag_session;
  if (!s) return TAG_ERR_INTERNAL;
  try {
    s->config = tag::load_run_config(config_path);
    s->out_dir = out_dir;
    tag::ensure_dir(s->out_dir);
  } catch (...) {
    tag_status status = classify_exception(s);
    delete s;
    return status;
  }
  *session_out = s;
  return TAG_OK;
}

void tag_session_close(tag_session* session) { delete session; }

const char* tag_session_error(const tag_session* session) {
  return session ? session->error.c_str() : "";
}

const char* tag_session_summary(const tag_session* session) {
  return session ? session->summary.c_str() : "";
}

tag_status tag_gen_data(tag_session* session) {
  return run_command(session, [&] { return tag::cmd_gen_data(session->config, session->out_dir); });
}

tag_status tag_train(tag_session* session) {
  return run_command(session, [&] { return tag::cmd_train(session->config, session->out_dir); });
}

tag_status tag_eval(tag_session* session, const char* checkpoint_path, const char* split) {
  if (!checkpoint_path || !split) return TAG_ERR_ARGUMENT;
  return run_command(session, [&] {
    return tag::cmd_eval(session->config, session->out_dir, checkpoint_path, split);
  });
}

tag_status tag_ablate(tag_session* session) {
  return run_command(session, [&] { return tag::cmd_ablate(session->config, session->out_dir); });
}

tag_status tag_sweep_ffn(tag_session* session, const int* widths, int num_widths) {
  if (num_widths < 0 || (num_widths > 0 && !widths)) return TAG_ERR_ARGUMENT;
  std::vector<int> w(widths, widths + num_widths);
  if (w.empty()) w = {256, 512, 1024, 2048};
  return run_command(session,
                     [&] { return tag::cmd_sweep_ffn(session->config, session->out_dir, w); });
}

tag_status tag_param_report(tag_session* session) {
  return run_command(session,
                     [&] { return tag::cmd_param_report(session->config, session->out_dir); });
}

tag_status tag_gradcheck(tag_session* session, int inject_fault, double* max_rel_err_out) {
  return run_command(session, [&] {
    return tag::cmd_gradcheck(session->config, session->out_dir, inject_fault != 0, max_rel_err_out);
  });
}

tag_status tag_bench(tag_session* session) {
  return run_command(session, [&] { return tag::cmd_bench(session->config, session->out_dir); });
}

tag_status tag_dump_features(tag_session* session, const char* checkpoint_path, const char* split,
                             const char* stage) {
  if (!checkpoint_path || !split || !stage) return TAG_ERR_ARGUMENT;
  return run_command(session, [&] {
    return tag::cmd_dump_features(session->config, session->out_dir, checkpoint_path, split, stage);
  });
}

}  // extern "C"
