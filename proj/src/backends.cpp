#include "audsem/backends.hpp"

#include <thread>

namespace audsem {

std::string_view schema_name(SchemaId id) noexcept {
    return id == SchemaId::ThreePhase ? "three_phase" : "two_phase";
}

void default_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

}  // namespace audsem
