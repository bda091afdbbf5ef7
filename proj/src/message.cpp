#include "camsim/message.hpp"

namespace camsim {

MessageClass class_of(MsgType type) {
  switch (type) {
    case MsgType::GETS:
    case MsgType::GETX:
    case MsgType::PUTX:
      return MessageClass::Request;
    case MsgType::Fwd_GETS:
    case MsgType::Fwd_GETX:
    case MsgType::INV:
      return MessageClass::Forward;
    case MsgType::Data_Dir:
    case MsgType::Data_Owner:
    case MsgType::InvAck:
    case MsgType::WB_Ack:
    case MsgType::Unblock:
      return MessageClass::Response;
  }
  return MessageClass::Response;
}

std::string_view to_string(MsgType type) {
  switch (type) {
    case MsgType::GETS: return "GETS";
    case MsgType::GETX: return "GETX";
    case MsgType::PUTX: return "PUTX";
    case MsgType::Fwd_GETS: return "Fwd_GETS";
    case MsgType::Fwd_GETX: return "Fwd_GETX";
    case MsgType::INV: return "INV";
    case MsgType::Data_Dir: return "Data_Dir";
    case MsgType::Data_Owner: return "Data_Owner";
    case MsgType::InvAck: return "InvAck";
    case MsgType::WB_Ack: return "WB_Ack";
    case MsgType::Unblock: return "Unblock";
  }
  return "?";
}

std::string_view to_string(MessageClass cls) {
  switch (cls) {
    case MessageClass::Request: return "Request";
    case MessageClass::Forward: return "Forward";
    case MessageClass::Response: return "Response";
  }
  return "?";
}

}  // namespace camsim
