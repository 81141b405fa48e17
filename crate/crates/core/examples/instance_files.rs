//! Writing an instance file by hand, resolving it, and printing the
//! canonical form the serializer produces.

use extcat::extension::{validate_extension, DEFAULT_BUDGET};
use extcat::instance::{serialize_instance, Instance};
use extcat::order::iso_poset;

const TEXT: &str = "
# two points swapped by the gauge group, one fixed petal
[set omega]
elements = w0, a1, a2, p
basepoint = w0

[subset conn_hat]
parent = omega
elements = a1, a2

[set conn]
elements = d0, d1
basepoint = d0

[group gauge]
points = omega
gen.g0 = (a1 a2)

[action gau_hat]
group = gauge
carrier = omega
natural = true

[group one]
elements = e
identity = e
row.e = e

[action gau]
group = one
carrier = conn

[hom xi]
source = one
target = gauge
images =

[functional base]
domain = conn
values = d0:0, d1:1

[context ctx]
omega = omega
gau_hat = gau_hat
conn_hat = conn_hat
conn = conn
gau = gau
xi = xi
base = base

[functional s]
domain = omega
values = w0:0, a1:1, a2:1, p:3

[class pb]
context = ctx
kind = Pb
functional = s
";

fn main() -> extcat::error::Result<()> {
    let inst = Instance::parse(TEXT)?;
    println!("digest sha256:{}", inst.digest());
    let cfg = inst.morphism_config()?;
    let (ctx_name, cl) = inst.class("pb", &cfg, DEFAULT_BUDGET)?;
    let ctx = inst.context(&ctx_name)?;
    for e in cl.members() {
        println!("{e} valid={}", validate_extension(ctx, e).is_valid());
    }
    println!("iso-classes: {:?}", iso_poset(&cl)?.classes);
    print!("{}", serialize_instance(inst.file()));
    Ok(())
}
