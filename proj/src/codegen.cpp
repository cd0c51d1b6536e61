#include "procforge/codegen.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace procforge {

namespace {

std::string quote(std::string_view s) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out = "\"";
  for (unsigned char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += static_cast<char>(c);
    } else if (c < 0x20 || c >= 0x7f) {
      out += "\\x";
      out += kHex[c >> 4];
      out += kHex[c & 0xf];
    } else {
      out += static_cast<char>(c);
    }
  }
  return out + "\"";
}

/// Comment-safe single line.
std::string one_line(std::string_view s) {
  std::string out;
  for (char c : s) out += (c == '\n' || c == '\r') ? ' ' : c;
  return out;
}

std::string literal_text(const Value& v) {
  switch (v.type()) {
    case Type::Bool: return v.as_bool() ? "true" : "false";
    case Type::Address: return v.as_address().to_checksum();
    case Type::String: return quote(v.as_string());
    default: return v.as_int().str();
  }
}

std::string capitalized(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string var_name(std::string_view name) { return "_" + std::string(name); }
std::string input_name(std::string_view name) { return "in_" + std::string(name); }

std::string param_decl(const FunctionParameter& p, bool external_input) {
  std::string t = solidity_type(p.type);
  if (p.type == Type::String) t += external_input ? " calldata" : " memory";
  return p.name.empty() ? t : t + " " + p.name;
}

void add_helper(std::vector<std::string>* helpers, const std::string& name) {
  if (helpers && std::find(helpers->begin(), helpers->end(), name) == helpers->end()) helpers->push_back(name);
}

bool is_constant(const Expr& e) { return referenced_variables(e).empty(); }

class ExprWriter {
 public:
  ExprWriter(const TypeScope& scope, std::vector<std::string>* helpers) : scope_(scope), helpers_(helpers) {}

  std::string write(const Expr& e) {
    if (e.kind != Expr::Kind::Literal && is_constant(e)) {
      try {
        return literal_text(eval_expr(e, {}));
      } catch (const EvalError&) {
        // Left unfolded so the failure surfaces at run time, as it would here.
      }
    }
    switch (e.kind) {
      case Expr::Kind::Literal: return literal_text(e.literal);
      case Expr::Kind::Variable: return var_name(e.name);
      case Expr::Kind::Unary:
        if (e.unary_op == UnaryOp::Not) return "!" + wrap(*e.lhs);
        add_helper(helpers_, "_negi");
        return "_negi(" + write(*e.lhs) + ")";
      case Expr::Kind::Binary: break;
    }
    BinaryOp op = e.binary_op;
    switch (op) {
      case BinaryOp::Add:
      case BinaryOp::Sub:
      case BinaryOp::Mul:
      case BinaryOp::Div: return arithmetic(e);
      case BinaryOp::And: return "(" + write(*e.lhs) + " && " + write(*e.rhs) + ")";
      case BinaryOp::Or: return "(" + write(*e.lhs) + " || " + write(*e.rhs) + ")";
      case BinaryOp::Eq:
      case BinaryOp::Ne: {
        if (type_of(*e.lhs) == Type::String) {
          std::string eq = "keccak256(abi.encodePacked(" + write(*e.lhs) + ")) " + std::string(op_symbol(op)) +
                           " keccak256(abi.encodePacked(" + write(*e.rhs) + "))";
          return "(" + eq + ")";
        }
        break;
      }
      default: break;
    }
    return "(" + write(*e.lhs) + " " + std::string(op_symbol(op)) + " " + write(*e.rhs) + ")";
  }

 private:
  Type type_of(const Expr& e) const {
    try {
      return check_expr(e, scope_);
    } catch (const TypeError&) {
      return Type::Uint256;
    }
  }

  std::string wrap(const Expr& e) {
    std::string s = write(e);
    if (s.front() == '(' || e.kind == Expr::Kind::Variable || e.kind == Expr::Kind::Literal) return s;
    return "(" + s + ")";
  }

  /// Negative constant operand, as its magnitude.
  static std::optional<BigInt> negative_constant(const Expr& e) {
    if (!is_constant(e)) return std::nullopt;
    try {
      Value v = eval_expr(e, {});
      if (v.type() == Type::IntLiteral && v.as_int() < 0) return -v.as_int();
    } catch (const EvalError&) {
    }
    return std::nullopt;
  }

  std::string arithmetic(const Expr& e) {
    Type t = type_of(e);
    BinaryOp op = e.binary_op;
    if (t == Type::Uint256 && (op == BinaryOp::Add || op == BinaryOp::Sub)) {
      // uint256 cannot hold a negative constant; move its sign into the operator.
      if (auto mag = negative_constant(*e.rhs)) {
        bool add = op == BinaryOp::Sub;
        add_helper(helpers_, add ? "_add" : "_sub");
        return std::string(add ? "_add(" : "_sub(") + write(*e.lhs) + ", " + mag->str() + ")";
      }
      if (op == BinaryOp::Add) {
        if (auto mag = negative_constant(*e.lhs)) {
          add_helper(helpers_, "_sub");
          return "_sub(" + write(*e.rhs) + ", " + mag->str() + ")";
        }
      }
    }
    std::string name;
    switch (op) {
      case BinaryOp::Add: name = "_add"; break;
      case BinaryOp::Sub: name = "_sub"; break;
      case BinaryOp::Mul: name = "_mul"; break;
      default: name = "_div"; break;
    }
    if (t == Type::Int256) name += "i";
    add_helper(helpers_, name);
    return name + "(" + write(*e.lhs) + ", " + write(*e.rhs) + ")";
  }

  const TypeScope& scope_;
  std::vector<std::string>* helpers_;
};

const char* helper_source(const std::string& name) {
  if (name == "_add") {
    return "    function _add(uint256 a, uint256 b) internal pure returns (uint256) {\n"
           "        uint256 c = a + b;\n"
           "        require(c >= a, \"uint256 overflow\");\n"
           "        return c;\n"
           "    }\n";
  }
  if (name == "_sub") {
    return "    function _sub(uint256 a, uint256 b) internal pure returns (uint256) {\n"
           "        require(b <= a, \"uint256 underflow\");\n"
           "        return a - b;\n"
           "    }\n";
  }
  if (name == "_mul") {
    return "    function _mul(uint256 a, uint256 b) internal pure returns (uint256) {\n"
           "        if (a == 0)\n"
           "            return 0;\n"
           "        uint256 c = a * b;\n"
           "        require(c / a == b, \"uint256 overflow\");\n"
           "        return c;\n"
           "    }\n";
  }
  if (name == "_div") {
    return "    function _div(uint256 a, uint256 b) internal pure returns (uint256) {\n"
           "        require(b != 0, \"division by zero\");\n"
           "        return a / b;\n"
           "    }\n";
  }
  if (name == "_addi") {
    return "    function _addi(int256 a, int256 b) internal pure returns (int256) {\n"
           "        int256 c = a + b;\n"
           "        require((b >= 0 && c >= a) || (b < 0 && c < a), \"int256 overflow\");\n"
           "        return c;\n"
           "    }\n";
  }
  if (name == "_subi") {
    return "    function _subi(int256 a, int256 b) internal pure returns (int256) {\n"
           "        int256 c = a - b;\n"
           "        require((b >= 0 && c <= a) || (b < 0 && c > a), \"int256 overflow\");\n"
           "        return c;\n"
           "    }\n";
  }
  if (name == "_muli") {
    return "    function _muli(int256 a, int256 b) internal pure returns (int256) {\n"
           "        if (a == 0)\n"
           "            return 0;\n"
           "        require(!(a == -1 && b == -2**255) && !(b == -1 && a == -2**255), \"int256 overflow\");\n"
           "        int256 c = a * b;\n"
           "        require(c / a == b, \"int256 overflow\");\n"
           "        return c;\n"
           "    }\n";
  }
  if (name == "_divi") {
    return "    function _divi(int256 a, int256 b) internal pure returns (int256) {\n"
           "        require(b != 0, \"division by zero\");\n"
           "        require(!(a == -2**255 && b == -1), \"int256 overflow\");\n"
           "        return a / b;\n"
           "    }\n";
  }
  return "    function _negi(int256 a) internal pure returns (int256) {\n"
         "        require(a != -2**255, \"int256 overflow\");\n"
         "        return -a;\n"
         "    }\n";
}

std::string render_helpers(std::vector<std::string> used) {
  static const std::vector<std::string> kOrder = {"_add", "_sub", "_mul", "_div", "_addi",
                                                  "_subi", "_muli", "_divi", "_negi"};
  std::string out;
  for (const auto& h : kOrder) {
    if (std::find(used.begin(), used.end(), h) == used.end()) continue;
    out += "\n";
    out += helper_source(h);
  }
  return out;
}

SourceUnit assemble(std::string file_name, std::vector<std::string> contracts) {
  SourceUnit u;
  u.file_name = std::move(file_name);
  u.pragma_version = kSolidityPragma;
  u.contracts = std::move(contracts);
  u.text = "pragma solidity " + u.pragma_version + ";\n";
  for (const auto& c : u.contracts) u.text += "\n" + c;
  return u;
}

std::string mask(const Marking& m) { return m.to_hex(); }

/// `p & uint(~0xM)`, in the form solc accepts for every mask width.
std::string cleared(const std::string& p, const Marking& m) {
  if (m.test(255)) return p + " & ~uint(" + mask(m) + ")";
  return p + " & uint(~" + mask(m) + ")";
}

std::string fired(const std::string& p, const Marking& pre, const Marking& post) {
  std::string s = cleared(p, pre);
  if (post.any()) s += " | " + mask(post);
  return s;
}

std::string enabled(const std::string& p, const Marking& m) {
  return "(" + p + " & " + mask(m) + " == " + mask(m) + ")";
}

}  // namespace

std::string solidity_type(Type t) {
  switch (t) {
    case Type::Uint256: return "uint256";
    case Type::Int256: return "int256";
    case Type::Bool: return "bool";
    case Type::Address: return "address";
    case Type::String: return "string";
    case Type::IntLiteral: return "int256";
  }
  return "uint256";
}

std::string solidity_expr(const Expr& e, const TypeScope& scope, std::vector<std::string>* helpers) {
  return ExprWriter(scope, helpers).write(e);
}

std::string render_interface(const InterfaceDecl& iface) {
  std::ostringstream os;
  os << "contract " << iface.name << " {\n";
  for (const auto& f : iface.functions) {
    os << "    function " << f.name << "(";
    for (std::size_t i = 0; i < f.inputs.size(); ++i) os << (i ? ", " : "") << param_decl(f.inputs[i], true);
    os << ") external";
    if (!f.outputs.empty()) {
      os << " returns (";
      for (std::size_t i = 0; i < f.outputs.size(); ++i) os << (i ? ", " : "") << param_decl(f.outputs[i], false);
      os << ")";
    }
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

InterfaceDecl project_interface(const RegistrySpec& spec) {
  using T = Type;
  InterfaceDecl d;
  d.id = contract_name(spec);
  d.name = contract_name(spec);
  auto fn = [&](std::string name, std::vector<FunctionParameter> in, std::vector<FunctionParameter> out) {
    d.functions.push_back({std::move(name), std::move(in), std::move(out)});
  };
  if (const auto* f = std::get_if<FungibleRegistrySpec>(&spec)) {
    fn("name", {}, {{"", T::String}});
    fn("symbol", {}, {{"", T::String}});
    fn("decimals", {}, {{"", T::Uint256}});
    fn("totalSupply", {}, {{"", T::Uint256}});
    fn("balanceOf", {{"owner", T::Address}}, {{"balance", T::Uint256}});
    fn("allowance", {{"owner", T::Address}, {"spender", T::Address}}, {{"remaining", T::Uint256}});
    fn("transfer", {{"to", T::Address}, {"value", T::Uint256}}, {{"success", T::Bool}});
    fn("approve", {{"spender", T::Address}, {"value", T::Uint256}}, {{"success", T::Bool}});
    fn("transferFrom", {{"from", T::Address}, {"to", T::Address}, {"value", T::Uint256}}, {{"success", T::Bool}});
    if (f->is_mintable) fn("mint", {{"to", T::Address}, {"value", T::Uint256}}, {{"success", T::Bool}});
    if (f->is_burnable) fn("burn", {{"value", T::Uint256}}, {{"success", T::Bool}});
    return d;
  }
  const auto& s = std::get<NonFungibleRegistrySpec>(spec);
  std::vector<FunctionParameter> create = {{"record_id", T::Address}};
  std::vector<FunctionParameter> attrs;
  for (const auto& a : s.attributes) attrs.push_back({a.name, a.type});
  create.insert(create.end(), attrs.begin(), attrs.end());
  fn("record_create", create, {});
  fn("record_get_owner", {{"record_id", T::Address}}, {{"record_owner", T::Address}});
  fn("record_get_attrs", {{"record_id", T::Address}}, attrs);
  for (const auto& a : s.attributes) {
    if (a.updatable) fn("record_update_" + a.name, {{"record_id", T::Address}, {"value", a.type}}, {});
  }
  if (s.is_ownership_transfer_enabled) {
    fn("record_ownership_transfer", {{"record_id", T::Address}, {"new_owner", T::Address}}, {});
  }
  fn("balanceOf", {{"owner", T::Address}}, {{"balance", T::Uint256}});
  fn("ownerOf", {{"tokenId", T::Uint256}}, {{"owner", T::Address}});
  fn("approve", {{"to", T::Address}, {"tokenId", T::Uint256}}, {});
  fn("getApproved", {{"tokenId", T::Uint256}}, {{"operator", T::Address}});
  fn("setApprovalForAll", {{"operator", T::Address}, {"approved", T::Bool}}, {});
  fn("isApprovedForAll", {{"owner", T::Address}, {"operator", T::Address}}, {{"approved", T::Bool}});
  fn("transferFrom", {{"from", T::Address}, {"to", T::Address}, {"tokenId", T::Uint256}}, {});
  return d;
}

// ---------------------------------------------------------------- fungible

SourceUnit gen_fungible(const FungibleRegistrySpec& spec) {
  const std::string name = contract_name(spec);
  std::ostringstream os;
  os << "contract " << name << " {\n";
  os << "    string private constant _name = " << quote(spec.name) << ";\n";
  os << "    string private constant _symbol = " << quote(spec.symbol) << ";\n";
  os << "    uint8 private constant _decimals = " << spec.decimals << ";\n";
  os << "\n";
  os << "    mapping(address => uint256) private _balances;\n";
  os << "    mapping(address => mapping(address => uint256)) private _allowances;\n";
  os << "    uint256 private _totalSupply;\n";
  if (spec.is_mintable) os << "    mapping(address => bool) private _minters;\n";
  if (spec.is_burnable) os << "    mapping(address => bool) private _burners;\n";
  os << "\n";
  os << "    event Transfer(address indexed from, address indexed to, uint256 value);\n";
  os << "    event Approval(address indexed owner, address indexed spender, uint256 value);\n";
  os << "\n";
  os << "    constructor() public {\n";
  for (const auto& a : spec.initially_distributed_accounts) {
    os << "        _balances[" << a.account.to_checksum() << "] += " << a.amount.str() << ";\n";
    os << "        emit Transfer(address(0), " << a.account.to_checksum() << ", " << a.amount.str() << ");\n";
  }
  os << "        _totalSupply = " << spec.total_supply.str() << ";\n";
  for (const auto& m : spec.minter_addresses) os << "        _minters[" << m.to_checksum() << "] = true;\n";
  for (const auto& b : spec.burner_addresses) os << "        _burners[" << b.to_checksum() << "] = true;\n";
  os << "    }\n";
  os << R"(
    function name() public view returns (string memory) {
        return _name;
    }

    function symbol() public view returns (string memory) {
        return _symbol;
    }

    function decimals() public view returns (uint8) {
        return _decimals;
    }

    function totalSupply() public view returns (uint256) {
        return _totalSupply;
    }

    function balanceOf(address owner) public view returns (uint256) {
        return _balances[owner];
    }

    function allowance(address owner, address spender) public view returns (uint256) {
        return _allowances[owner][spender];
    }

    function transfer(address to, uint256 value) public returns (bool) {
        _transfer(msg.sender, to, value);
        return true;
    }

    function approve(address spender, uint256 value) public returns (bool) {
        require(spender != address(0), "invalid recipient");
        _allowances[msg.sender][spender] = value;
        emit Approval(msg.sender, spender, value);
        return true;
    }

    function transferFrom(address from, address to, uint256 value) public returns (bool) {
        require(_allowances[from][msg.sender] >= value, "insufficient allowance");
        _allowances[from][msg.sender] -= value;
        _transfer(from, to, value);
        return true;
    }
)";
  if (spec.is_mintable) {
    os << R"(
    function mint(address to, uint256 value) public returns (bool) {
        require(_minters[msg.sender], "unauthorized");
        require(to != address(0), "invalid recipient");
        require(_totalSupply + value >= _totalSupply, "overflow");
        _totalSupply += value;
        _balances[to] += value;
        emit Transfer(address(0), to, value);
        return true;
    }
)";
  }
  if (spec.is_burnable) {
    os << R"(
    function burn(uint256 value) public returns (bool) {
        require(_burners[msg.sender], "unauthorized");
        require(_balances[msg.sender] >= value, "insufficient balance");
        _balances[msg.sender] -= value;
        _totalSupply -= value;
        emit Transfer(msg.sender, address(0), value);
        return true;
    }
)";
  }
  os << R"(
    function _transfer(address from, address to, uint256 value) internal {
        require(to != address(0), "invalid recipient");
        require(_balances[from] >= value, "insufficient balance");
        _balances[from] -= value;
        _balances[to] += value;
        emit Transfer(from, to, value);
    }
}
)";
  return assemble(name + ".sol", {os.str()});
}

// ------------------------------------------------------------ non-fungible

namespace {

std::string attr_params(const NonFungibleRegistrySpec& s) {
  std::string out;
  for (const auto& a : s.attributes) {
    out += ", " + solidity_type(a.type) + (a.type == Type::String ? " memory " : " ") + a.name;
  }
  return out;
}

std::string attr_returns(const NonFungibleRegistrySpec& s) {
  std::string out;
  for (std::size_t i = 0; i < s.attributes.size(); ++i) {
    const auto& a = s.attributes[i];
    out += (i ? ", " : "") + solidity_type(a.type) + (a.type == Type::String ? " memory " : " ") + a.name;
  }
  return out;
}

std::string attr_args(const NonFungibleRegistrySpec& s) {
  std::string out;
  for (const auto& a : s.attributes) out += ", " + a.name;
  return out;
}

std::string change_event(const AttributeDecl& a) { return capitalized(a.name) + "Changed"; }

/// Storage-specific expressions for the ERC-721 functions, in terms of `record_id`.
struct NftParts {
  std::string owner_expr;
  std::string exists_expr;
};

void emit_access_parts(std::ostringstream& os, const NonFungibleRegistrySpec& s) {
  os << "    address private _deployer;\n";
  os << "    mapping(address => bool) private _processes;\n";
  if (s.is_registry_function_access_control_enabled) os << "    mapping(address => bool) private _authorized;\n";
  os << "    mapping(address => uint256) private _ownedCount;\n";
  os << "    mapping(address => address) private _approvals;\n";
  os << "    mapping(address => mapping(address => bool)) private _operators;\n";
  os << "\n";
  os << "    event Transfer(address indexed from, address indexed to, uint256 indexed tokenId);\n";
  os << "    event Approval(address indexed owner, address indexed approved, uint256 indexed tokenId);\n";
  os << "    event ApprovalForAll(address indexed owner, address indexed operator, bool approved);\n";
  os << "    event RecordCreated(address indexed recordId, address indexed owner);\n";
  for (const auto& a : s.attributes) {
    if (a.history_tracked) {
      os << "    event " << change_event(a) << "(address indexed recordId, " << solidity_type(a.type) << " value);\n";
    }
  }
  os << R"(
    modifier onlyDeployer() {
        require(msg.sender == _deployer, "unauthorized");
        _;
    }

    modifier onlyProcess() {
        require(_processes[msg.sender], "unauthorized");
        _;
    }
)";
  if (s.is_registry_function_access_control_enabled) {
    os << R"(
    modifier onlyAuthorized() {
        require(msg.sender == _deployer || _processes[msg.sender] || _authorized[msg.sender], "unauthorized");
        _;
    }
)";
  }
  os << R"(
    constructor() public {
        _deployer = msg.sender;
    }

    function registerProcess(address process) public onlyDeployer {
        _processes[process] = true;
    }
)";
  if (s.is_registry_function_access_control_enabled) {
    os << R"(
    function authorize(address account) public onlyDeployer {
        _authorized[account] = true;
    }
)";
  }
}

std::string acl(const NonFungibleRegistrySpec& s) {
  return s.is_registry_function_access_control_enabled ? " onlyAuthorized" : "";
}

/// Condition admitting the record owner, plus the deployer under record ACL.
std::string actor_check(const NonFungibleRegistrySpec& s, const std::string& owner) {
  std::string c = "msg.sender == " + owner;
  if (s.is_registry_record_access_control_enabled) c += " || msg.sender == _deployer";
  return c;
}

void emit_erc721(std::ostringstream& os, const NonFungibleRegistrySpec& s, const NftParts& p) {
  auto owner_of = [&](const std::string& id) {
    std::string e = p.owner_expr;
    for (std::size_t pos; (pos = e.find("record_id")) != std::string::npos;) e.replace(pos, 9, id);
    return e;
  };
  auto exists = [&](const std::string& id) {
    std::string e = p.exists_expr;
    for (std::size_t pos; (pos = e.find("record_id")) != std::string::npos;) e.replace(pos, 9, id);
    return e;
  };
  os << R"(
    function balanceOf(address owner) public view returns (uint256) {
        require(owner != address(0), "zero address");
        return _ownedCount[owner];
    }

    function ownerOf(uint256 tokenId) public view returns (address) {
        address id = _recordId(tokenId);
        require()" << exists("id") << R"(, "unknown record");
        return )" << owner_of("id") << R"(;
    }

    function approve(address to, uint256 tokenId) public {
        address id = _recordId(tokenId);
        require()" << exists("id") << R"(, "unknown record");
        address owner = )" << owner_of("id") << R"(;
        require(msg.sender == owner || _operators[owner][msg.sender], "unauthorized");
        _approvals[id] = to;
        emit Approval(owner, to, tokenId);
    }

    function getApproved(uint256 tokenId) public view returns (address) {
        address id = _recordId(tokenId);
        require()" << exists("id") << R"(, "unknown record");
        return _approvals[id];
    }

    function setApprovalForAll(address operator, bool approved) public {
        _operators[msg.sender][operator] = approved;
        emit ApprovalForAll(msg.sender, operator, approved);
    }

    function isApprovedForAll(address owner, address operator) public view returns (bool) {
        return _operators[owner][operator];
    }

    function transferFrom(address from, address to, uint256 tokenId) public)"
     << acl(s) << R"( {
)";
  if (!s.is_ownership_transfer_enabled) {
    os << "        revert(\"transfer disabled\");\n";
  } else {
    os << "        address id = _recordId(tokenId);\n";
    os << "        require(" << exists("id") << ", \"unknown record\");\n";
    os << "        address owner = " << owner_of("id") << ";\n";
    os << "        require(owner == from, \"not the owner\");\n";
    if (s.is_ownership_transfer_enabled_to_bpmn) {
      os << "        require(_processes[msg.sender], \"unauthorized\");\n";
    } else {
      os << "        require(msg.sender == owner || msg.sender == _approvals[id] || _operators[owner][msg.sender], "
            "\"unauthorized\");\n";
    }
    os << "        _changeOwner(id, to);\n";
  }
  os << R"(    }

    function safeTransferFrom(address from, address to, uint256 tokenId) public {
        safeTransferFrom(from, to, tokenId, "");
    }

    function safeTransferFrom(address from, address to, uint256 tokenId, bytes memory data) public {
        transferFrom(from, to, tokenId);
        if (_isContract(to)) {
            bytes4 reply = ERC721Receiver(to).onERC721Received(msg.sender, from, tokenId, data);
            require(reply == 0x150b7a02, "receiver rejected the record");
        }
    }

    function supportsInterface(bytes4 interfaceId) public pure returns (bool) {
        return interfaceId == 0x01ffc9a7 || interfaceId == 0x80ac58cd;
    }

    function _recordId(uint256 tokenId) internal pure returns (address) {
        require(tokenId < 2**160, "unknown record");
        return address(uint160(tokenId));
    }

    function _isContract(address account) internal view returns (bool) {
        uint256 size;
        assembly { size := extcodesize(account) }
        return size > 0;
    }
)";
}

std::string receiver_interface() {
  return "contract ERC721Receiver {\n"
         "    function onERC721Received(address operator, address from, uint256 tokenId, bytes calldata data) "
         "external returns (bytes4);\n"
         "}\n";
}

std::string create_guard(const NonFungibleRegistrySpec& s) {
  std::string m = acl(s);
  if (s.is_record_creation_restricted_to_bpmn) m += " onlyProcess";
  return m;
}

SourceUnit gen_single(const NonFungibleRegistrySpec& s) {
  const std::string name = contract_name(s);
  std::ostringstream os;
  os << "contract " << name << " {\n";
  os << "    struct Record {\n";
  os << "        address owner;\n";
  for (const auto& a : s.attributes) os << "        " << solidity_type(a.type) << " " << a.name << ";\n";
  os << "        bool exists;\n";
  os << "    }\n\n";
  os << "    mapping(address => Record) private _records;\n";
  emit_access_parts(os, s);

  os << "\n    function record_create(address record_id" << attr_params(s) << ") public" << create_guard(s) << " {\n";
  os << "        require(record_id != address(0), \"zero record id\");\n";
  os << "        require(!_records[record_id].exists, \"duplicate record\");\n";
  os << "        _records[record_id] = Record(msg.sender" << attr_args(s) << ", true);\n";
  os << "        _ownedCount[msg.sender] += 1;\n";
  os << "        emit RecordCreated(record_id, msg.sender);\n";
  os << "        emit Transfer(address(0), msg.sender, uint256(record_id));\n";
  for (const auto& a : s.attributes) {
    if (a.history_tracked) os << "        emit " << change_event(a) << "(record_id, " << a.name << ");\n";
  }
  os << "    }\n";

  os << R"(
    function record_get_owner(address record_id) public view returns (address record_owner) {
        require(_records[record_id].exists, "unknown record");
        return _records[record_id].owner;
    }
)";
  os << "\n    function record_get_attrs(address record_id) public view returns (" << attr_returns(s) << ") {\n";
  os << "        Record storage r = _records[record_id];\n";
  os << "        require(r.exists, \"unknown record\");\n";
  os << "        return (";
  for (std::size_t i = 0; i < s.attributes.size(); ++i) os << (i ? ", " : "") << "r." << s.attributes[i].name;
  os << ");\n    }\n";

  for (const auto& a : s.attributes) {
    if (!a.updatable) continue;
    os << "\n    function record_update_" << a.name << "(address record_id, " << solidity_type(a.type)
       << (a.type == Type::String ? " memory" : "") << " value) public" << acl(s) << " {\n";
    os << "        Record storage r = _records[record_id];\n";
    os << "        require(r.exists, \"unknown record\");\n";
    if (s.is_record_creation_restricted_to_bpmn) {
      os << "        require(_processes[msg.sender], \"unauthorized\");\n";
    } else {
      os << "        require(" << actor_check(s, "r.owner") << ", \"unauthorized\");\n";
    }
    os << "        r." << a.name << " = value;\n";
    if (a.history_tracked) os << "        emit " << change_event(a) << "(record_id, value);\n";
    os << "    }\n";
  }

  if (s.is_ownership_transfer_enabled) {
    os << "\n    function record_ownership_transfer(address record_id, address new_owner) public" << acl(s) << " {\n";
    os << "        require(_records[record_id].exists, \"unknown record\");\n";
    if (s.is_ownership_transfer_enabled_to_bpmn) {
      os << "        require(_processes[msg.sender], \"unauthorized\");\n";
    } else {
      os << "        require(" << actor_check(s, "_records[record_id].owner") << ", \"unauthorized\");\n";
    }
    os << "        _changeOwner(record_id, new_owner);\n";
    os << "    }\n";
  }

  emit_erc721(os, s, {"_records[record_id].owner", "_records[record_id].exists"});
  if (s.is_ownership_transfer_enabled) {
    os << R"(
    function _changeOwner(address record_id, address to) internal {
        require(to != address(0), "invalid recipient");
        address from = _records[record_id].owner;
        _ownedCount[from] -= 1;
        _ownedCount[to] += 1;
        _records[record_id].owner = to;
        _approvals[record_id] = address(0);
        emit Transfer(from, to, uint256(record_id));
    }
)";
  }
  os << "}\n";
  return assemble(name + ".sol", {receiver_interface(), os.str()});
}

SourceUnit gen_distributed(const NonFungibleRegistrySpec& s) {
  const std::string name = contract_name(s);
  std::string base = name;
  if (base.size() > 8 && base.ends_with("Registry")) base.resize(base.size() - 8);
  const std::string record = base + "Record";

  std::ostringstream rc;
  rc << "contract " << record << " {\n";
  rc << "    address public registry;\n";
  rc << "    address public owner;\n";
  for (const auto& a : s.attributes) rc << "    " << solidity_type(a.type) << " public " << a.name << ";\n";
  rc << "\n    modifier onlyRegistry() {\n";
  rc << "        require(msg.sender == registry, \"unauthorized\");\n";
  rc << "        _;\n";
  rc << "    }\n";
  rc << "\n    constructor(address _owner";
  // Parameters are `__name` so they do not shadow the getters.
  for (const auto& a : s.attributes) {
    rc << ", " << solidity_type(a.type) << (a.type == Type::String ? " memory " : " ") << "__" << a.name;
  }
  rc << ") public {\n";
  rc << "        registry = msg.sender;\n";
  rc << "        owner = _owner;\n";
  for (const auto& a : s.attributes) rc << "        " << a.name << " = __" << a.name << ";\n";
  rc << "    }\n";
  rc << "\n    function setOwner(address newOwner) public onlyRegistry {\n";
  rc << "        owner = newOwner;\n";
  rc << "    }\n";
  for (const auto& a : s.attributes) {
    if (!a.updatable) continue;
    rc << "\n    function set_" << a.name << "(" << solidity_type(a.type) << (a.type == Type::String ? " memory" : "")
       << " value) public onlyRegistry {\n";
    rc << "        " << a.name << " = value;\n";
    rc << "    }\n";
  }
  rc << "\n    function attrs() public view returns (" << attr_returns(s) << ") {\n";
  rc << "        return (";
  for (std::size_t i = 0; i < s.attributes.size(); ++i) rc << (i ? ", " : "") << s.attributes[i].name;
  rc << ");\n    }\n";
  rc << "}\n";
  std::string record_text = rc.str();

  std::ostringstream os;
  os << "contract " << name << " {\n";
  os << "    mapping(address => " << record << ") private _records;\n";
  os << "    address[] public recordContracts;\n";
  emit_access_parts(os, s);

  os << "\n    function record_create(address record_id" << attr_params(s) << ") public" << create_guard(s) << " {\n";
  os << "        require(record_id != address(0), \"zero record id\");\n";
  os << "        require(address(_records[record_id]) == address(0), \"duplicate record\");\n";
  os << "        " << record << " r = new " << record << "(msg.sender" << attr_args(s) << ");\n";
  os << "        _records[record_id] = r;\n";
  os << "        recordContracts.push(address(r));\n";
  os << "        _ownedCount[msg.sender] += 1;\n";
  os << "        emit RecordCreated(record_id, msg.sender);\n";
  os << "        emit Transfer(address(0), msg.sender, uint256(record_id));\n";
  for (const auto& a : s.attributes) {
    if (a.history_tracked) os << "        emit " << change_event(a) << "(record_id, " << a.name << ");\n";
  }
  os << "    }\n";

  os << "\n    function record_contract(address record_id) public view returns (address) {\n";
  os << "        return address(_records[record_id]);\n";
  os << "    }\n";
  os << R"(
    function record_get_owner(address record_id) public view returns (address record_owner) {
        require(address(_records[record_id]) != address(0), "unknown record");
        return _records[record_id].owner();
    }
)";
  os << "\n    function record_get_attrs(address record_id) public view returns (" << attr_returns(s) << ") {\n";
  os << "        require(address(_records[record_id]) != address(0), \"unknown record\");\n";
  os << "        return _records[record_id].attrs();\n";
  os << "    }\n";

  for (const auto& a : s.attributes) {
    if (!a.updatable) continue;
    os << "\n    function record_update_" << a.name << "(address record_id, " << solidity_type(a.type)
       << (a.type == Type::String ? " memory" : "") << " value) public" << acl(s) << " {\n";
    os << "        " << record << " r = _records[record_id];\n";
    os << "        require(address(r) != address(0), \"unknown record\");\n";
    if (s.is_record_creation_restricted_to_bpmn) {
      os << "        require(_processes[msg.sender], \"unauthorized\");\n";
    } else {
      os << "        require(" << actor_check(s, "r.owner()") << ", \"unauthorized\");\n";
    }
    os << "        r.set_" << a.name << "(value);\n";
    if (a.history_tracked) os << "        emit " << change_event(a) << "(record_id, value);\n";
    os << "    }\n";
  }

  if (s.is_ownership_transfer_enabled) {
    os << "\n    function record_ownership_transfer(address record_id, address new_owner) public" << acl(s) << " {\n";
    os << "        require(address(_records[record_id]) != address(0), \"unknown record\");\n";
    if (s.is_ownership_transfer_enabled_to_bpmn) {
      os << "        require(_processes[msg.sender], \"unauthorized\");\n";
    } else {
      os << "        require(" << actor_check(s, "_records[record_id].owner()") << ", \"unauthorized\");\n";
    }
    os << "        _changeOwner(record_id, new_owner);\n";
    os << "    }\n";
  }

  emit_erc721(os, s, {"_records[record_id].owner()", "address(_records[record_id]) != address(0)"});
  if (s.is_ownership_transfer_enabled) {
    os << R"(
    function _changeOwner(address record_id, address to) internal {
        require(to != address(0), "invalid recipient");
        address from = _records[record_id].owner();
        _ownedCount[from] -= 1;
        _ownedCount[to] += 1;
        _records[record_id].setOwner(to);
        _approvals[record_id] = address(0);
        emit Transfer(from, to, uint256(record_id));
    }
)";
  }
  os << "}\n";
  return assemble(name + ".sol", {receiver_interface(), record_text, os.str()});
}

}  // namespace

SourceUnit gen_nonfungible(const NonFungibleRegistrySpec& spec) {
  return spec.registry_type == RegistryType::Distributed ? gen_distributed(spec) : gen_single(spec);
}

SourceUnit gen_registry(const RegistrySpec& spec) {
  if (const auto* f = std::get_if<FungibleRegistrySpec>(&spec)) return gen_fungible(*f);
  return gen_nonfungible(std::get<NonFungibleRegistrySpec>(spec));
}

// ----------------------------------------------------------------- process

std::map<std::string, std::string> task_function_names(const MarkingAutomaton& automaton) {
  std::map<std::string, std::string> out;
  std::set<std::string> taken;
  for (const auto& t : automaton.externals()) {
    std::string base;
    for (char c : label_of(*t.node)) {
      base += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::tolower(static_cast<unsigned char>(c)))
                                                          : '_';
    }
    if (base.empty() || !std::isalpha(static_cast<unsigned char>(base[0]))) base = "task_" + base;
    base = capitalized(base);
    std::string name = base;
    for (int n = 2; taken.contains(name) || taken.contains(name + "_complete"); ++n) name = base + "_" + std::to_string(n);
    taken.insert(name);
    taken.insert(name + "_complete");
    out.emplace(t.node->id, name);
  }
  return out;
}

namespace {

class ProcessWriter {
 public:
  ProcessWriter(const ProcessModel& m, const MarkingAutomaton& a) : m_(m), a_(a), names_(task_function_names(a)) {}

  SourceUnit run() {
    std::vector<std::string> contracts;
    for (const auto& iface : m_.interfaces) contracts.push_back(render_interface(iface));
    std::string monitor = monitor_contract();
    contracts.push_back(factory_contract());
    contracts.push_back(monitor);
    if (!contracts.empty()) {
      contracts.front() = "// -------- EXTERNAL SMART CONTRACT INTERFACES\n" + contracts.front();
    }
    return assemble("ProcessFactory.sol", std::move(contracts));
  }

 private:
  std::vector<const InterfaceDecl*> unbound() const {
    std::vector<const InterfaceDecl*> out;
    for (const auto& i : m_.interfaces) {
      if (!i.contract_address) out.push_back(&i);
    }
    return out;
  }

  std::string factory_contract() const {
    std::ostringstream os;
    os << "contract ProcessFactory {\n";
    os << "    address[] public createdInstances;\n";
    os << "    mapping(address => address[]) public participantsOf;\n";
    os << "\n    event instanceCreated(address instance);\n";
    os << "\n    function createInstance(address[] memory _participants";
    for (const auto* i : unbound()) os << ", address _addressOf" << i->name;
    os << ") public returns (address) {\n";
    os << "        ProcessMonitor instance = new ProcessMonitor(";
    auto ub = unbound();
    for (std::size_t k = 0; k < ub.size(); ++k) os << (k ? ", " : "") << "_addressOf" << ub[k]->name;
    os << ");\n";
    os << "        createdInstances.push(address(instance));\n";
    os << "        participantsOf[address(instance)] = _participants;\n";
    os << "        emit instanceCreated(address(instance));\n";
    os << "        return address(instance);\n";
    os << "    }\n";
    os << "\n    function instanceCount() public view returns (uint) {\n";
    os << "        return createdInstances.length;\n";
    os << "    }\n";
    os << "}\n";
    return os.str();
  }

  /// Registry calls of `node`, one statement each, indented by `ind`.
  std::string invocations(const Node& node, const std::string& ind) {
    std::string out;
    std::set<std::string> declared;
    for (const InvocationBinding* inv : m_.invocations_of(node.id)) {
      const InterfaceDecl* iface = m_.find_interface(inv->target_interface);
      const FunctionDecl* fn = iface ? iface->find_function(inv->fn_name) : nullptr;
      if (!fn) continue;
      std::string local = "instanceOf" + iface->name;
      if (declared.insert(local).second) {
        out += ind + iface->name + " " + local + " = " + iface->name + "(addressOf" + iface->name + ");\n";
      }
      std::string call = local + "." + fn->name + "(";
      for (std::size_t i = 0; i < fn->inputs.size(); ++i) {
        auto b = std::find_if(inv->inputs.begin(), inv->inputs.end(),
                              [&](const InputBinding& ib) { return ib.param == fn->inputs[i].name; });
        std::string arg = "0";
        if (b != inv->inputs.end()) {
          switch (b->source.kind) {
            case BindingSource::Kind::ProcessAddress: arg = "address(this)"; break;
            case BindingSource::Kind::Literal: {
              auto v = coerce(b->source.literal, fn->inputs[i].type);
              arg = literal_text(v ? *v : b->source.literal);
              break;
            }
            case BindingSource::Kind::TaskInput:
              arg = m_.find_variable(b->source.name) ? var_name(b->source.name) : input_name(b->source.name);
              break;
            case BindingSource::Kind::Variable: arg = var_name(b->source.name); break;
          }
        }
        call += (i ? ", " : "") + arg;
      }
      call += ")";
      std::vector<std::string> slots(fn->outputs.size());
      bool any = false;
      for (const auto& ob : inv->outputs) {
        for (std::size_t k = 0; k < fn->outputs.size(); ++k) {
          if (fn->outputs[k].name == ob.output) {
            slots[k] = var_name(ob.target);
            any = true;
          }
        }
      }
      if (!any) {
        out += ind + call + ";\n";
      } else if (slots.size() == 1) {
        out += ind + slots[0] + " = " + call + ";\n";
      } else {
        std::string tuple = "(";
        for (std::size_t k = 0; k < slots.size(); ++k) tuple += (k ? ", " : "") + slots[k];
        out += ind + tuple + ") = " + call + ";\n";
      }
    }
    return out;
  }

  std::string script(const Node& node, const std::string& ind) {
    std::string out;
    TypeScope scope = m_.scope_for(&node);
    for (const auto& st : node.script) {
      out += ind + var_name(st.target) + " = " + solidity_expr(*st.value, scope, &helpers_) + ";\n";
    }
    return out;
  }

  std::string task_function(const ExternalTransition& t) {
    const Node& n = *t.node;
    const std::string fname = names_.at(n.id);
    std::ostringstream os;
    os << "    function " << fname << "(uint preconditionsp";
    for (const auto& in : n.inputs) {
      os << ", " << solidity_type(in.type) << (in.type == Type::String ? " memory " : " ") << input_name(in.name);
    }
    os << ") internal returns (uint) {\n";
    std::string body;
    for (const auto& in : n.inputs) {
      if (m_.find_variable(in.name)) body += "            " + var_name(in.name) + " = " + input_name(in.name) + ";\n";
    }
    std::string calls = invocations(n, "            ");
    if (t.alternatives.size() == 1) {
      const auto& alt = t.alternatives[0];
      os << "        if (" << enabled("preconditionsp", alt.pre) << ") {\n";
      os << body << calls;
      os << "            return " << fired("preconditionsp", alt.pre, alt.post) << ";\n";
      os << "        } else\n";
      os << "            return preconditionsp;\n";
      os << "    }\n";
      return os.str();
    }
    os << "        uint consumed;\n";
    os << "        uint produced;\n";
    for (std::size_t k = 0; k < t.alternatives.size(); ++k) {
      const auto& alt = t.alternatives[k];
      os << "        " << (k ? "} else if (" : "if (") << enabled("preconditionsp", alt.pre) << ") {\n";
      os << "            consumed = " << mask(alt.pre) << ";\n";
      os << "            produced = " << mask(alt.post) << ";\n";
    }
    os << "        } else\n";
    os << "            return preconditionsp;\n";
    auto unindent = [](const std::string& s) {
      std::string out;
      std::istringstream in(s);
      for (std::string line; std::getline(in, line);) out += line.substr(4) + "\n";
      return out;
    };
    os << unindent(body) << unindent(calls);
    os << "        return preconditionsp & ~consumed | produced;\n";
    os << "    }\n";
    return os.str();
  }

  std::string task_wrapper(const ExternalTransition& t) {
    const Node& n = *t.node;
    const std::string fname = names_.at(n.id);
    std::ostringstream os;
    os << "    function " << fname << "_complete(";
    for (std::size_t i = 0; i < n.inputs.size(); ++i) {
      const auto& in = n.inputs[i];
      os << (i ? ", " : "") << solidity_type(in.type) << (in.type == Type::String ? " memory " : " ")
         << input_name(in.name);
    }
    os << ") public {\n";
    os << "        uint next = " << fname << "(marking";
    for (const auto& in : n.inputs) os << ", " << input_name(in.name);
    os << ");\n";
    os << "        if (next == marking) {\n";
    os << "            emit taskRejected(" << quote(label_of(n)) << ");\n";
    os << "            return;\n";
    os << "        }\n";
    os << "        emit taskExecuted(" << quote(label_of(n)) << ");\n";
    os << "        marking = _closure(next);\n";
    os << "        if (marking == 0)\n";
    os << "            emit processCompleted();\n";
    os << "    }\n";
    return os.str();
  }

  /// Body of one automatic transition once `pre` has been consumed.
  std::string auto_body(const AutoTransition& t, const std::string& pre, const std::string& ind) {
    std::string out;
    if (!t.exclusive()) {
      if (t.node->kind == NodeKind::ScriptTask) out += script(*t.node, ind) + invocations(*t.node, ind);
      std::string r = "m & " + pre;
      if (t.post.any()) r += " | " + mask(t.post);
      return out + ind + "return " + r + ";\n";
    }
    TypeScope scope = m_.scope_for(nullptr);
    const Branch* fallback = nullptr;
    for (const auto& b : t.branches) {
      if (b.is_default) {
        if (!fallback) fallback = &b;
        continue;
      }
      std::string ret = "return m & " + pre + " | " + mask(b.post) + ";\n";
      if (!b.guard) return out + ind + ret;
      out += ind + "if (" + strip_parens(solidity_expr(*b.guard, scope, &helpers_)) + ")\n";
      out += ind + "    " + ret;
    }
    if (fallback) return out + ind + "return m & " + pre + " | " + mask(fallback->post) + ";\n";
    return out + ind + "revert(\"no branch taken\");\n";
  }

  static std::string strip_parens(const std::string& s) {
    if (s.size() < 2 || s.front() != '(' || s.back() != ')') return s;
    int depth = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '(') ++depth;
      if (s[i] == ')') --depth;
      if (depth == 0 && i + 1 < s.size()) return s;
    }
    return s.substr(1, s.size() - 2);
  }

  std::string step_function() {
    std::ostringstream os;
    os << "    function _step(uint m) internal returns (uint) {\n";
    for (const auto& t : a_.autos()) {
      os << "        // " << one_line(label_of(*t.node)) << "\n";
      if (t.pre.size() == 1) {
        std::string pre = t.pre[0].test(255) ? "~uint(" + mask(t.pre[0]) + ")" : "uint(~" + mask(t.pre[0]) + ")";
        os << "        if (" << enabled("m", t.pre[0]) << ") {\n";
        os << auto_body(t, pre, "            ");
        os << "        }\n";
        continue;
      }
      os << "        {\n";
      os << "            uint pre = 0;\n";
      for (std::size_t k = 0; k < t.pre.size(); ++k) {
        os << "            " << (k ? "else if (" : "if (") << enabled("m", t.pre[k]) << ")\n";
        os << "                pre = " << mask(t.pre[k]) << ";\n";
      }
      os << "            if (pre != 0) {\n";
      os << auto_body(t, "~pre", "                ");
      os << "            }\n";
      os << "        }\n";
    }
    os << "        return m;\n";
    os << "    }\n";
    return os.str();
  }

  std::string monitor_contract() {
    std::ostringstream os;
    os << "contract ProcessMonitor {\n";
    os << "    // ---------- PROCESS VARIABLES\n";
    for (const auto& v : m_.variables) os << "    " << solidity_type(v.type) << " " << var_name(v.name) << ";\n";
    os << "    // ----------------------------\n\n";
    os << "    // -------- EXTERNAL SMART CONTRACT ADDRESSES\n";
    for (const auto& i : m_.interfaces) {
      os << "    address addressOf" << i.name;
      if (i.contract_address) os << " = " << i.contract_address->to_checksum();
      os << ";\n";
    }
    os << "    // ------------------------------------\n\n";
    os << "    uint public marking;\n\n";
    os << "    event taskExecuted(string task);\n";
    os << "    event taskRejected(string task);\n";
    os << "    event processCompleted();\n\n";

    os << "    constructor(";
    auto ub = unbound();
    for (std::size_t k = 0; k < ub.size(); ++k) os << (k ? ", " : "") << "address _addressOf" << ub[k]->name;
    os << ") public {\n";
    for (const auto* i : ub) os << "        addressOf" << i->name << " = _addressOf" << i->name << ";\n";
    for (const auto& v : m_.variables) {
      os << "        " << var_name(v.name) << " = " << literal_text(v.initial ? *v.initial : Value::zero(v.type))
         << ";\n";
    }
    os << "        marking = _closure(" << mask(a_.initial_marking()) << ");\n";
    os << "    }\n";

    std::string tasks;
    for (const auto& t : a_.externals()) tasks += "\n" + task_function(t) + "\n" + task_wrapper(t);
    std::string step = step_function();
    os << tasks;
    os << "\n" << step;
    os << "\n    function _closure(uint m) internal returns (uint) {\n";
    os << "        for (uint i = 0; i <= " << 4 * a_.flow_count() << "; i++) {\n";
    os << "            uint next = _step(m);\n";
    os << "            if (next == m)\n";
    os << "                return m;\n";
    os << "            m = next;\n";
    os << "        }\n";
    os << "        revert(\"closure did not terminate\");\n";
    os << "    }\n";
    os << render_helpers(helpers_);
    os << "}\n";
    return os.str();
  }

  const ProcessModel& m_;
  const MarkingAutomaton& a_;
  std::map<std::string, std::string> names_;
  std::vector<std::string> helpers_;
};

}  // namespace

SourceUnit gen_process(const ProcessModel& model, const MarkingAutomaton& automaton) {
  return ProcessWriter(model, automaton).run();
}

}  // namespace procforge
