import setuptools

from fairdc.get_version import git_revision, git_tag, version

try:
    long_desc = open("README.md").read()
except IOError:
    long_desc = "Failed to read README.md"

with open("requirements.txt") as reqs:
    install_requires = reqs.read().splitlines()

with open("dev-requirements.txt") as reqs:
    extras_require = {"dev": reqs.read().splitlines()}

with open("fairdc/version.py", "w") as version_file:
    version_file.write(f"""# Generated in setup.py

git_tag = {git_tag!r}
git_revision = {git_revision!r}
version = {version!r}
""")

setuptools.setup(
    name="fairdc",
    version=version,

    description="Deep fair discriminative clustering with flow-based fair assignments.",
    long_description=long_desc,
    long_description_content_type="text/markdown",

    packages=setuptools.find_packages(exclude=["tests", "tests.*"]),

    install_requires=install_requires,
    extras_require=extras_require,
    python_requires=">=3.9",

    entry_points={
        "console_scripts": ["fairdc=fairdc.__main__:main"],
    },

    classifiers=[
        "Development Status :: 3 - Alpha",
        "License :: OSI Approved :: GNU Affero General Public License v3 or later (AGPLv3+)",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
        "Framework :: AsyncIO",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
    package_data={
        "fairdc": ["example-config.yaml"],
    },
    data_files=[
        (".", ["fairdc/example-config.yaml"]),
    ],
)
