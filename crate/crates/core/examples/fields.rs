//! Vector fields three ways: closed form, autodiff-tape and the Ito drift of a model.

use sdenet::sde::{make_heston_model, AutodiffField, HestonParams, VectorField};

fn main() -> sdenet::Result<()> {
    let heston = make_heston_model(HestonParams::reference())?;
    let x = heston.x0.clone();
    println!("Heston at x0 = {x:?}");
    for (i, f) in heston.fields().iter().enumerate() {
        println!("  V_{i}: {:?} -> {:?}", f.kind(), f.eval_vec(0.0, &x));
    }
    println!("  Ito drift: {:?}", heston.ito_drift().eval_vec(0.0, &x));

    // A field written once; its Jacobian comes from the reverse sweep.
    let rot = AutodiffField::new(2, |_, _t, y| vec![-y[1] * y[0], y[0].exp()]);
    let mut jac = [0.0; 4];
    rot.jacobian(0.0, &[0.5, 2.0], &mut jac);
    println!("autodiff field at (0.5, 2): {:?}, Jacobian {jac:?}", rot.eval_vec(0.0, &[0.5, 2.0]));
    Ok(())
}
