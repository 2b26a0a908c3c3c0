#!/usr/bin/env python3
"""
Setup script for the dihedral solver engine
"""
import os
import sys
import subprocess

ENGINE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "engine")


def check_python_version():
    """Check Python version"""
    if sys.version_info < (3, 9):
        print("Error: Python 3.9+ required")
        sys.exit(1)
    print(f"✓ Python {sys.version_info.major}.{sys.version_info.minor} detected")


def create_virtual_env():
    """Create virtual environment"""
    venv_path = os.path.join(ENGINE_DIR, "venv")
    if not os.path.exists(venv_path):
        print("Creating virtual environment...")
        subprocess.run([sys.executable, "-m", "venv", venv_path], check=True)
    print("✓ Virtual environment ready")


def _venv_bin(name: str) -> str:
    folder = "Scripts" if os.name == "nt" else "bin"
    return os.path.join(ENGINE_DIR, "venv", folder, name)


def install_requirements():
    """Install Python dependencies"""
    print("Installing requirements...")
    subprocess.run([_venv_bin("pip"), "install", "-r", os.path.join(ENGINE_DIR, "requirements.txt")], check=True)
    print("✓ Requirements installed")


def smoke_check():
    """Run the quick acceptance suite once"""
    print("Running quick acceptance checks...")
    result = subprocess.run([_venv_bin("python"), "cli.py", "check", "--quick"], cwd=ENGINE_DIR)
    if result.returncode != 0:
        print(f"Warning: quick checks exited with {result.returncode}")
    else:
        print("✓ Quick checks passed")


def main():
    print("Setting up the dihedral 2l-body solver...")
    print("-" * 50)

    check_python_version()
    create_virtual_env()
    install_requirements()
    smoke_check()

    print("-" * 50)
    print("Setup complete!")
    print("\nTo use the CLI:")
    print("  cd engine")
    print("  source venv/bin/activate  # On Windows: venv\\Scripts\\activate")
    print("  python cli.py cc --l 2,3 --alpha 1.0")
    print("\nTests:")
    print("  pytest            # fast suite")
    print("  pytest -m slow    # full sweeps")


if __name__ == "__main__":
    if len(sys.argv) > 1:
        # Invoked by setuptools/pip as a build script; metadata lives in pyproject.toml.
        from setuptools import setup
        setup()
    else:
        main()
